//! Coordinate picture: normalized Hermite functions, Gauss–Hermite
//! quadrature, synthesis of Fock vectors on the grid and the closed-form
//! vacua of `A` and `B†`.
//!
//! Weights are kept in two conventions. `weights` integrate against
//! `e^{-x²}`; `folded_weights = weights · e^{x²}` integrate plain `L²`
//! integrands and are what every inner product on the grid uses. The folded
//! weights are computed directly, so they stay finite at large orders where
//! the raw weights underflow.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{FockVector, Params, C64};

const RESCALE: f64 = 1e150;

/// `e_n(x)` for `n = 0..count`, by the three-term recurrence on normalized
/// Hermite functions
/// `e_{n+1} = √(2/(n+1)) x e_n - √(n/(n+1)) e_{n-1}`.
///
/// The Gaussian factor is carried in log form so that neither `H_n` nor
/// `n!` is ever formed.
pub fn hermite_functions(count: usize, x: C64) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let gauss = -0.5 * x * x - 0.25 * PI.ln();
    let mut scale = 0.0f64;
    let mut prev = C64::new(0.0, 0.0);
    let mut cur = C64::new(1.0, 0.0);
    out.push(combine(cur, scale, gauss, 0, x)?);
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.norm();
        if mag > RESCALE {
            prev /= mag;
            cur /= mag;
            scale += mag.ln();
        }
        out.push(combine(cur, scale, gauss, n + 1, x)?);
    }
    Ok(out)
}

fn combine(h: C64, scale: f64, gauss: C64, n: usize, x: C64) -> Result<C64> {
    let mag = h.norm();
    if mag == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let exponent = gauss + (scale + mag.ln());
    if exponent.re > 709.0 {
        return Err(Error::Range { n, x });
    }
    Ok(h / mag * exponent.exp())
}

/// `e_n(x) = H_n(x) e^{-x²/2} / sqrt(2ⁿ n! √π)`; complex `x` is allowed.
pub fn hermite_function(n: usize, x: C64) -> Result<C64> {
    Ok(hermite_functions(n + 1, x)?[n])
}

/// Gauss–Hermite rule of order `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    folded_weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes in increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫ f(x) e^{-x²} dx`. Entries may underflow to zero at
    /// the outermost nodes of large rules.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for `∫ f(x) dx`, i.e. `w_i e^{x_i²}`.
    pub fn folded_weights(&self) -> &[f64] {
        &self.folded_weights
    }

    /// `∫ f(x) dx` using the folded weights.
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.folded_weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `⟨f, g⟩ = ∫ conj(f) g dx` from samples on the nodes.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        self.folded_weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(&w, (a, b))| w * a.conj() * b)
            .sum()
    }

    /// `Q × M` table of `e_n(x_i)`.
    pub fn basis_samples(&self, dim: usize) -> Result<DMatrix<f64>> {
        let mut table = DMatrix::zeros(self.order, dim);
        for (i, &x) in self.nodes.iter().enumerate() {
            for (n, v) in hermite_functions(dim, C64::from(x))?.into_iter().enumerate() {
                table[(i, n)] = v.re;
            }
        }
        Ok(table)
    }
}

/// Gauss–Hermite nodes from the eigenvalues of the symmetric tridiagonal
/// Jacobi matrix (zero diagonal, off-diagonal `√(k/2)`), polished by Newton
/// steps on `e_Q`. Weights follow from the Christoffel formula
/// `w_i e^{x_i²} = 1 / (Q e_{Q-1}(x_i)²)`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureGrid> {
    if order < 2 {
        return Err(Error::Dimension(order));
    }
    let mut diag = vec![0.0; order];
    let mut off: Vec<f64> = (1..order).map(|k| (0.5 * k as f64).sqrt()).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off).map_err(|_| Error::Numerical {
        dim: order,
        what: "implicit QL iteration did not converge".into(),
    })?;
    diag.sort_by(f64::total_cmp);

    let q = order as f64;
    for x in diag.iter_mut() {
        for _ in 0..3 {
            let (last, before) = hermite_pair(order, *x);
            let slope = (2.0 * q).sqrt() * before - *x * last;
            if slope != 0.0 {
                *x -= last / slope;
            }
        }
    }
    // exact reflection symmetry
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let m = 0.5 * (diag[j] - diag[i]);
        diag[i] = -m;
        diag[j] = m;
    }
    if order % 2 == 1 {
        diag[order / 2] = 0.0;
    }

    let mut folded_weights = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for &x in &diag {
        let (_, before, scale) = hermite_pair_scaled(order, x);
        // ln e_{Q-1}(x)² = 2 ln|h| + 2 scale - x² - ln(π)/2
        let ln_sq = 2.0 * before.abs().ln() + 2.0 * scale - x * x - 0.5 * PI.ln();
        let ln_folded = -q.ln() - ln_sq;
        folded_weights.push(ln_folded.exp());
        weights.push((ln_folded - x * x).exp());
    }
    Ok(QuadratureGrid {
        order,
        nodes: diag,
        weights,
        folded_weights,
    })
}

/// Scaled `(h_Q, h_{Q-1})` sharing one omitted factor, enough for Newton
/// ratios.
fn hermite_pair(order: usize, x: f64) -> (f64, f64) {
    let (last, before, _) = hermite_pair_scaled(order, x);
    (last, before)
}

/// Unnormalized recurrence values with `e_n(x) = h_n · exp(scale - x²/2) π^{-1/4}`.
fn hermite_pair_scaled(order: usize, x: f64) -> (f64, f64, f64) {
    let mut scale = 0.0;
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    for n in 0..order {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= cur.abs();
            scale += cur.abs().ln();
            cur = cur.signum();
        }
    }
    (cur, prev, scale)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson-type shifts. `off[i]` couples `i` and `i+1`; `off` has the same
/// length as `diag` with a trailing zero. Eigenvalues overwrite `diag`.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> std::result::Result<(), ()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(());
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// `Σ_n coeffs[n] e_n(x_i)` at every node.
pub fn synthesize(v: &FockVector, grid: &QuadratureGrid) -> Result<Vec<C64>> {
    let table = grid.basis_samples(v.dim())?.map(C64::from);
    Ok((table * v.coeffs()).iter().copied().collect())
}

/// A function on the real line, possibly evaluated at complex-shifted
/// arguments, with a human-readable label.
#[derive(Clone)]
pub struct CoordinateFunction {
    description: String,
    eval: Arc<dyn Fn(C64) -> C64 + Send + Sync>,
}

impl fmt::Debug for CoordinateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoordinateFunction")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl CoordinateFunction {
    pub fn new<F>(description: impl Into<String>, eval: F) -> Self
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        Self {
            description: description.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn eval(&self, x: f64) -> C64 {
        (self.eval)(C64::from(x))
    }

    pub fn eval_complex(&self, z: C64) -> C64 {
        (self.eval)(z)
    }

    pub fn sample(&self, grid: &QuadratureGrid) -> Vec<C64> {
        grid.nodes().iter().map(|&x| self.eval(x)).collect()
    }

    /// Coefficients `⟨e_n, f⟩` for `n < dim` by quadrature. The tail bound
    /// is the quadrature estimate `sqrt(‖f‖² - Σ|c_n|²)`, not a certificate.
    pub fn project(&self, grid: &QuadratureGrid, dim: usize) -> Result<FockVector> {
        let samples = self.sample(grid);
        let table = grid.basis_samples(dim)?;
        let weighted: DVector<C64> = DVector::from_iterator(
            samples.len(),
            samples
                .iter()
                .zip(grid.folded_weights())
                .map(|(f, &w)| f * w),
        );
        let coeffs = table.map(C64::from).transpose() * weighted;
        let total = grid.inner(&samples, &samples).re;
        let tail = (total - coeffs.norm_squared()).max(0.0).sqrt();
        FockVector::new(coeffs, tail)
    }
}

/// Normalization constants of the closed-form vacua.
///
/// `N_φ` is the positive real constant giving `‖φ₀‖ = 1`, the norm of
/// `D(α)e₀`; `N_Ψ` then follows from
/// `conj(N_φ) N_Ψ = π^{-1/2} e^{-(β+ᾱ)²/2}`, which makes `⟨φ₀,Ψ₀⟩ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VacuumNormalization {
    pub n_phi: C64,
    pub n_psi: C64,
}

impl VacuumNormalization {
    pub fn for_params(params: &Params) -> Self {
        let ar = params.alpha.re;
        let n_phi = C64::from(PI.powf(-0.25) * (-ar * ar).exp());
        let sum = params.beta + params.alpha.conj();
        let product = (-0.5 * sum * sum).exp() / PI.sqrt();
        Self {
            n_phi,
            n_psi: product / n_phi.conj(),
        }
    }
}

/// Vacuum of `A = a + α`: `φ₀(x) = N_φ exp(-(x²/2 + √2 α x))`.
pub fn vacuum_phi0(params: &Params) -> CoordinateFunction {
    let n = VacuumNormalization::for_params(params).n_phi;
    let alpha = params.alpha;
    CoordinateFunction::new(
        format!("vacuum of A, alpha = {alpha}"),
        move |x| n * (-(0.5 * x * x + std::f64::consts::SQRT_2 * alpha * x)).exp(),
    )
}

/// Vacuum of `B† = a + β`: `Ψ₀(x) = N_Ψ exp(-(x²/2 + √2 β x))`.
pub fn vacuum_psi0(params: &Params) -> CoordinateFunction {
    let n = VacuumNormalization::for_params(params).n_psi;
    let beta = params.beta;
    CoordinateFunction::new(
        format!("vacuum of B-dagger, beta = {beta}"),
        move |x| n * (-(0.5 * x * x + std::f64::consts::SQRT_2 * beta * x)).exp(),
    )
}

/// Magnitudes of `e^{kx} f(x)` at the two outermost nodes on each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeDecay {
    pub left_outer: f64,
    pub left_inner: f64,
    pub right_inner: f64,
    pub right_outer: f64,
}

impl EdgeDecay {
    /// The weighted function is smaller at the outermost node than at its
    /// neighbour on both sides.
    pub fn decays_outward(&self) -> bool {
        self.left_outer < self.left_inner && self.right_outer < self.right_inner
    }

    pub fn max_outer(&self) -> f64 {
        self.left_outer.max(self.right_outer)
    }
}

/// Decay evidence for membership in the set of Schwartz functions that stay
/// Schwartz after multiplication by any `e^{kx}`. Finite grids cannot decide
/// membership; this only samples the edges.
pub fn edge_decay(f: &CoordinateFunction, grid: &QuadratureGrid, k: f64) -> EdgeDecay {
    let nodes = grid.nodes();
    let q = nodes.len();
    let at = |x: f64| (k * x).exp() * f.eval(x).norm();
    EdgeDecay {
        left_outer: at(nodes[0]),
        left_inner: at(nodes[1]),
        right_inner: at(nodes[q - 2]),
        right_outer: at(nodes[q - 1]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values_at_origin() {
        let v = hermite_functions(6, C64::from(0.0)).unwrap();
        assert!((v[0].re - PI.powf(-0.25)).abs() < 1e-16);
        assert_eq!(v[1], C64::new(0.0, 0.0));
        // e_2(0) = H_2(0)/sqrt(8 √π) = -2/sqrt(8 √π)
        assert!((v[2].re + 2.0 / (8.0 * PI.sqrt()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hermite_matches_explicit_polynomials() {
        // H_3 = 8x³ - 12x, norm sqrt(2³ 3! √π)
        for &x in &[-2.3_f64, -0.4, 0.9, 3.1] {
            let want = (8.0 * x * x * x - 12.0 * x) * (-0.5 * x * x).exp()
                / (48.0 * PI.sqrt()).sqrt();
            let got = hermite_function(3, C64::from(x)).unwrap();
            assert!((got.re - want).abs() < 1e-14, "{x}: {got} vs {want}");
        }
    }

    #[test]
    fn hermite_far_tail_underflows_gracefully() {
        let v = hermite_functions(200, C64::from(45.0)).unwrap();
        assert!(v.iter().all(|z| z.re.is_finite()));
        assert!(v[0].norm() == 0.0 || v[0].norm() < 1e-300);
        assert!(v[199].norm() > 0.0);
    }

    #[test]
    fn hermite_overflow_is_a_range_error() {
        let r = hermite_function(4, C64::new(0.0, 60.0));
        assert!(matches!(r, Err(Error::Range { .. })));
    }

    #[test]
    fn two_point_rule() {
        let g = gauss_hermite(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.nodes()[0] + s).abs() < 1e-15);
        assert!((g.nodes()[1] - s).abs() < 1e-15);
        for w in g.weights() {
            assert!((w - PI.sqrt() / 2.0).abs() < 1e-15);
        }
        assert!(matches!(gauss_hermite(1), Err(Error::Dimension(1))));
    }

    #[test]
    fn weights_sum_and_exactness() {
        let g = gauss_hermite(64).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - PI.sqrt()).abs() < 1e-13);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.weights().iter().all(|&w| w > 0.0));

        // ∫ x^{2j} e^{-x²} = Γ(j + 1/2) for 2j ≤ 2Q - 1
        let g = gauss_hermite(10).unwrap();
        let mut gamma = PI.sqrt();
        for j in 0..10 {
            let approx: f64 = g
                .nodes()
                .iter()
                .zip(g.weights())
                .map(|(x, w)| w * x.powi(2 * j))
                .sum();
            assert!((approx - gamma).abs() < 1e-12 * gamma, "j={j}");
            gamma *= j as f64 + 0.5;
        }
    }

    #[test]
    fn large_rule_folded_weights_stay_positive() {
        let g = gauss_hermite(512).unwrap();
        assert!(g.folded_weights().iter().all(|&w| w > 0.0 && w.is_finite()));
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        let norm5 = g.integrate(|x| {
            let e = hermite_function(5, C64::from(x)).unwrap();
            C64::from(e.norm_sqr())
        });
        assert!((norm5.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormality_under_quadrature() {
        let g = gauss_hermite(80).unwrap();
        let t = g.basis_samples(21).unwrap();
        for n in 0..=20 {
            for m in 0..=20 {
                let s: f64 = (0..g.order())
                    .map(|i| g.folded_weights()[i] * t[(i, n)] * t[(i, m)])
                    .sum();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "({n},{m}): {s}");
            }
        }
        let g = gauss_hermite(64).unwrap();
        let e3: Vec<C64> = g.nodes().iter().map(|&x| hermite_function(3, C64::from(x)).unwrap()).collect();
        let e7: Vec<C64> = g.nodes().iter().map(|&x| hermite_function(7, C64::from(x)).unwrap()).collect();
        assert!(g.inner(&e3, &e7).norm() < 1e-12);
    }

    #[test]
    fn synthesize_ground_state() {
        let g = gauss_hermite(32).unwrap();
        let s = synthesize(&FockVector::basis(0, 8).unwrap(), &g).unwrap();
        for (x, v) in g.nodes().iter().zip(s) {
            let want = PI.powf(-0.25) * (-0.5 * x * x).exp();
            assert!((v.re - want).abs() < 1e-15 && v.im == 0.0);
        }
    }

    #[test]
    fn vacua_reduce_to_ground_state() {
        let p = Params::new(0.0, C64::from(0.0), C64::from(0.0)).unwrap();
        let phi = vacuum_phi0(&p);
        let psi = vacuum_psi0(&p);
        for &x in &[-1.0, 0.0, 0.5, 2.0] {
            let e0 = hermite_function(0, C64::from(x)).unwrap();
            assert!((phi.eval(x) - e0).norm() < 1e-15);
            assert!((psi.eval(x) - e0).norm() < 1e-15);
        }
    }

    #[test]
    fn vacuum_normalization_constraint() {
        let p = Params::reference();
        let n = VacuumNormalization::for_params(&p);
        let sum = p.beta + p.alpha.conj();
        let want = (-0.5 * sum * sum).exp() / PI.sqrt();
        assert!((n.n_phi.conj() * n.n_psi - want).norm() < 1e-15);
        assert!(n.n_phi.im == 0.0 && n.n_phi.re > 0.0);
    }
}
