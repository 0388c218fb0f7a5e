//! Truncated Fock-space algebra.
//!
//! Every operator lives on the span of the first `M` number states
//! `e_0 .. e_{M-1}`. Exponentials of the ladder operators are never formed
//! with a general matrix exponential: `exp(γ a)` is an exact finite sum
//! because the truncated `a` is nilpotent, and `exp(δ a†)` is the exact
//! principal block of the infinite-dimensional operator, with a certified
//! bound on the `ℓ²` mass that falls outside the block.
//!
//! Operators built from `a` and `a†` with a central commutator are kept in
//! normal-ordered form `s · exp(r a†) · exp(l a)` ([`NormalOrdered`]). Its
//! truncation is the principal block of the true operator, so truncated
//! spectral norms are monotone in `M`.

use std::ops::{Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Shift parameters of the model: `c = a + k`, `A = a + α`, `B = a† + β̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub k: f64,
    pub alpha: C64,
    pub beta: C64,
}

impl Params {
    pub fn new(k: f64, alpha: C64, beta: C64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::NonFinite("k"));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::NonFinite("alpha"));
        }
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::NonFinite("beta"));
        }
        Ok(Self { k, alpha, beta })
    }

    /// The pinned non-degenerate instance used by the default experiment
    /// configuration: `k = 0.7`, `α = 0.3 + 0.2i`, `β = -0.5`.
    pub fn reference() -> Self {
        Self {
            k: 0.7,
            alpha: C64::new(0.3, 0.2),
            beta: C64::new(-0.5, 0.0),
        }
    }

    /// The self-adjoint case `α = β = k`.
    pub fn degenerate(k: f64) -> Self {
        Self {
            k,
            alpha: C64::new(k, 0.0),
            beta: C64::new(k, 0.0),
        }
    }

    /// `β - α`; the family norms grow with its modulus.
    pub fn gap(&self) -> C64 {
        self.beta - self.alpha
    }

    pub fn is_degenerate(&self) -> bool {
        self.alpha == self.beta
    }

    /// Normalization `μ(α,β) = exp((|α|² + |β|²)/2 - β ᾱ)` that makes
    /// `⟨φ₀, Ψ₀⟩ = 1`.
    pub fn mu(&self) -> C64 {
        let a = self.alpha;
        let b = self.beta;
        (C64::from(0.5 * (a.norm_sqr() + b.norm_sqr())) - b * a.conj()).exp()
    }
}

/// Dense `M × M` complex matrix of a truncated operator.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim < 2 || entries.ncols() != dim {
            return Err(Error::Dimension(dim.min(entries.ncols())));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical {
                dim,
                what: "non-finite operator entry".into(),
            });
        }
        Ok(Self(entries))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self(DMatrix::identity(dim, dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// `self + s · 1`.
    pub fn shifted(&self, s: C64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += s;
        }
        Self(m)
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    pub fn leading_block(&self, size: usize) -> DMatrix<C64> {
        self.0.view((0, 0), (size, size)).into_owned()
    }

    /// Largest entry modulus of `self - other` on the leading `size` block.
    pub fn max_deviation_on_block(&self, other: &Self, size: usize) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..size {
            for i in 0..size {
                worst = worst.max((self.0[(i, j)] - other.0[(i, j)]).norm());
            }
        }
        worst
    }

    /// Largest entry modulus on the leading `size` block.
    pub fn max_entry_on_block(&self, size: usize) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..size {
            for i in 0..size {
                worst = worst.max(self.0[(i, j)].norm());
            }
        }
        worst
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        let dim = self.dim();
        let svd = nalgebra::linalg::SVD::try_new(self.0.clone(), false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical {
                dim,
                what: "singular value decomposition did not converge".into(),
            })?;
        Ok(svd.singular_values.max())
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

/// Coefficients of a vector in the number basis, plus a bound on the `ℓ²`
/// norm of the coefficients that the truncation discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    coeffs: DVector<C64>,
    tail_bound: f64,
}

impl FockVector {
    pub fn new(coeffs: DVector<C64>, tail_bound: f64) -> Result<Self> {
        let dim = coeffs.len();
        if dim < 2 {
            return Err(Error::Dimension(dim));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical {
                dim,
                what: "non-finite vector coefficient".into(),
            });
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::Invariant(format!(
                "tail bound must be non-negative, got {tail_bound}"
            )));
        }
        Ok(Self { coeffs, tail_bound })
    }

    /// The number state `e_n`.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::Dimension(dim));
        }
        let mut coeffs = DVector::zeros(dim);
        coeffs[n] = ONE;
        Ok(Self {
            coeffs,
            tail_bound: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.coeffs.dotc(&other.coeffs)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            coeffs: &self.coeffs * s,
            tail_bound: self.tail_bound * s.norm(),
        }
    }

    /// Unit-norm copy; the tail bound is rescaled with the coefficients.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scaled(C64::from(1.0 / n))
    }

    /// Index of the last nonzero coefficient, `None` for the zero vector.
    pub fn support_end(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|z| *z != ZERO)
    }
}

/// `count` unit vectors with coefficients drawn uniformly from the square
/// `[-1,1] + i[-1,1]` on `e_0 .. e_{support-1}`, reproducible from `seed`.
pub fn seeded_vectors(seed: u64, count: usize, support: usize, dim: usize) -> Result<Vec<FockVector>> {
    check_dim(dim)?;
    if support == 0 || support > dim / 2 {
        return Err(Error::Invariant(format!(
            "random vectors must live on the interior block: support {support}, M = {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut coeffs = DVector::zeros(dim);
            for c in coeffs.iter_mut().take(support) {
                *c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            FockVector { coeffs, tail_bound: 0.0 }.normalized()
        })
        .collect())
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::Dimension(dim))
    } else {
        Ok(())
    }
}

/// `a` on the truncated space: `a_{n-1,n} = √n`.
pub fn annihilator(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    Ok(OperatorMatrix(m))
}

/// `a†` on the truncated space.
pub fn creation(dim: usize) -> Result<OperatorMatrix> {
    Ok(annihilator(dim)?.adjoint())
}

/// `a + s`. With `s = k, α, β` this is `c`, `A` and `B†`.
pub fn shifted_annihilator(shift: C64, dim: usize) -> Result<OperatorMatrix> {
    Ok(annihilator(dim)?.shifted(shift))
}

/// `a† + s̄`, the adjoint of [`shifted_annihilator`]. With `s = k, α, β`
/// this is `c†`, `A†` and `B`.
pub fn shifted_creation(shift: C64, dim: usize) -> Result<OperatorMatrix> {
    Ok(creation(dim)?.shifted(shift.conj()))
}

/// `n̂₀ = a†a`, exactly `diag(0, 1, .., M-1)` at every truncation.
pub fn number(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    Ok(OperatorMatrix(DMatrix::from_diagonal(&DVector::from_fn(
        dim,
        |n, _| C64::from(n as f64),
    ))))
}

#[derive(Clone, Debug)]
pub struct CommutatorDefect {
    /// `[a, a†] - 1` on the truncated space.
    pub defect: OperatorMatrix,
    /// Size of the largest leading block on which the defect is exactly zero.
    pub interior_dim: usize,
}

pub fn commutator_defect(dim: usize) -> Result<CommutatorDefect> {
    let a = annihilator(dim)?;
    let ad = creation(dim)?;
    let defect = (&(&a * &ad) - &(&ad * &a)).shifted(-ONE);
    let interior_dim = exact_zero_block(&defect);
    Ok(CommutatorDefect {
        defect,
        interior_dim,
    })
}

/// Largest `s` with the leading `s × s` block zero up to rounding.
///
/// The products `√n · √n` carry one rounding each, so an entry in row or
/// column `i` counts as zero below `4 ε (i + 1)`.
pub(crate) fn exact_zero_block(m: &OperatorMatrix) -> usize {
    let e = m.entries();
    let negligible = |i: usize, j: usize| e[(i, j)].norm() <= 4.0 * f64::EPSILON * (i.max(j) + 1) as f64;
    let mut s = 0;
    while s < m.dim() && (0..=s).all(|i| negligible(i, s) && negligible(s, i)) {
        s += 1;
    }
    s
}

/// `ln(n!)` for `n = 0..=max`.
pub(crate) fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(acc);
    for n in 1..=max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// Upper-triangular entries `γ^k √((i+k)!/i!) / k!` at `(i, i+k)`.
fn ladder_exponential(gamma: C64, dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let mut t = ONE;
        m[(i, i)] = t;
        for k in 1..dim - i {
            t *= gamma * ((i + k) as f64).sqrt() / k as f64;
            m[(i, i + k)] = t;
        }
    }
    m
}

/// `exp(γ a)` as the exact finite sum `Σ_{j<M} (γa)^j / j!`.
pub fn exp_lowering(gamma: C64, dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    OperatorMatrix::new(ladder_exponential(gamma, dim))
}

/// Principal block of `exp(δ a†)` with per-column tail bounds.
#[derive(Clone, Debug)]
pub struct RaisingExponential {
    pub matrix: OperatorMatrix,
    /// Upper bound on the `ℓ²` norm of rows `≥ M` of column `n` of the
    /// infinite-dimensional operator.
    pub tail_bounds: Vec<f64>,
}

pub fn exp_raising(delta: C64, dim: usize) -> Result<RaisingExponential> {
    check_dim(dim)?;
    let matrix = OperatorMatrix::new(ladder_exponential(delta.conj(), dim).adjoint())?;
    let lnf = ln_factorials(2 * dim + 2);
    let tail_bounds = (0..dim)
        .map(|n| raising_column_tail(delta.norm(), n, dim, &lnf))
        .collect();
    Ok(RaisingExponential {
        matrix,
        tail_bounds,
    })
}

/// Bound on `sqrt(Σ_{k ≥ M-n} |δ|^{2k} (n+k)! / (n! k!²))`.
///
/// The term ratio `|δ|² (n+k+1)/(k+1)²` decreases in `k`, so once it drops
/// below one at the first discarded term the remainder is dominated by a
/// geometric series.
fn raising_column_tail(delta_abs: f64, n: usize, dim: usize, lnf: &[f64]) -> f64 {
    if delta_abs == 0.0 {
        return 0.0;
    }
    let first = dim - n;
    let ratio = delta_abs * delta_abs * (dim + 1) as f64 / ((first + 1) as f64).powi(2);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_term = 2.0 * first as f64 * delta_abs.ln() + lnf[dim] - lnf[n] - 2.0 * lnf[first];
    (0.5 * (ln_term - (1.0 - ratio).ln())).exp()
}

/// Operator `scalar · exp(raising · a†) · exp(lowering · a)`.
///
/// Since `exp(lowering · a)` maps the truncated space into itself, the
/// product of the two truncated factors is exactly the principal block of
/// the infinite-dimensional operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalOrdered {
    pub scalar: C64,
    pub raising: C64,
    pub lowering: C64,
}

impl NormalOrdered {
    /// `D(z) = exp(z̄ a - z a†) = e^{-|z|²/2} exp(-z a†) exp(z̄ a)`.
    pub fn displacement(z: C64) -> Self {
        Self {
            scalar: C64::from(-0.5 * z.norm_sqr()).exp(),
            raising: -z,
            lowering: z.conj(),
        }
    }

    /// `V(α,β) = e^{α(β̄-ᾱ)/2} exp(β̄ a - α a†)`.
    ///
    /// Disentangling moves `exp(-α a†)` left at the cost of `e^{-αβ̄/2}`.
    pub fn intertwiner(alpha: C64, beta: C64) -> Self {
        let prefactor = 0.5 * alpha * (beta.conj() - alpha.conj());
        let central = -0.5 * alpha * beta.conj();
        Self {
            scalar: (prefactor + central).exp(),
            raising: -alpha,
            lowering: beta.conj(),
        }
    }

    pub fn matrix(&self, dim: usize) -> Result<OperatorMatrix> {
        check_dim(dim)?;
        let raising = ladder_exponential(self.raising.conj(), dim).adjoint();
        let lowering = ladder_exponential(self.lowering, dim);
        OperatorMatrix::new(raising * lowering * self.scalar)
    }

    /// Per-column bound on the mass the truncation drops:
    /// `|s| Σ_{j ≤ n} |exp(l a)_{j n}| · tail_j` with `tail_j` the raising tail.
    pub fn column_tail_bounds(&self, dim: usize) -> Result<Vec<f64>> {
        check_dim(dim)?;
        let lnf = ln_factorials(2 * dim + 2);
        let raising_tails: Vec<f64> = (0..dim)
            .map(|j| raising_column_tail(self.raising.norm(), j, dim, &lnf))
            .collect();
        let lowering = ladder_exponential(self.lowering, dim);
        let s = self.scalar.norm();
        Ok((0..dim)
            .map(|n| {
                s * (0..=n)
                    .filter(|&j| lowering[(j, n)] != ZERO)
                    .map(|j| lowering[(j, n)].norm() * raising_tails[j])
                    .sum::<f64>()
            })
            .collect())
    }

    /// Inverse assembled from exactly inverted factors in reverse order,
    /// `s⁻¹ exp(-l a) exp(-r a†)`. This equals the inverse of the truncated
    /// matrix; it never inverts a matrix numerically.
    pub fn inverse_matrix(&self, dim: usize) -> Result<OperatorMatrix> {
        check_dim(dim)?;
        let lowering = ladder_exponential(-self.lowering, dim);
        let raising = ladder_exponential(-self.raising.conj(), dim).adjoint();
        OperatorMatrix::new(lowering * raising * self.scalar.inv())
    }
}

/// Truncation of `D(z)`.
pub fn displacement(z: C64, dim: usize) -> Result<OperatorMatrix> {
    NormalOrdered::displacement(z).matrix(dim)
}

/// Truncation of `V(α,β)`.
pub fn intertwiner_v(alpha: C64, beta: C64, dim: usize) -> Result<OperatorMatrix> {
    NormalOrdered::intertwiner(alpha, beta).matrix(dim)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormGrowthRow {
    pub dim: usize,
    pub norm: f64,
}

/// Spectral norms of the operator rebuilt at each truncation in `dims`.
///
/// Growth without saturation is numerical evidence of unboundedness, not a
/// proof.
pub fn truncated_norm_growth<F>(build: F, dims: &[usize]) -> Result<Vec<NormGrowthRow>>
where
    F: Fn(usize) -> Result<OperatorMatrix>,
{
    check_truncation_list(dims)?;
    dims.iter()
        .map(|&dim| {
            let op = build(dim)?;
            let norm = op.spectral_norm()?;
            Ok(NormGrowthRow { dim, norm })
        })
        .collect()
}

pub(crate) fn check_truncation_list(dims: &[usize]) -> Result<()> {
    let increasing = dims.windows(2).all(|w| w[0] < w[1]);
    if dims.is_empty() || !increasing || dims.iter().any(|&d| d < 2) {
        return Err(Error::TruncationList(dims.to_vec()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn annihilator_small() {
        let a = annihilator(2).unwrap();
        assert_eq!(a.entries()[(0, 1)], ONE);
        assert_eq!(a.entries()[(0, 0)], ZERO);
        assert_eq!(a.entries()[(1, 0)], ZERO);
        assert_eq!(a.entries()[(1, 1)], ZERO);
        let a4 = annihilator(4).unwrap();
        assert_eq!(a4.entries()[(2, 3)], C64::from(3f64.sqrt()));
        assert!(matches!(annihilator(1), Err(Error::Dimension(1))));
    }

    #[test]
    fn ladder_action_on_basis() {
        let a = annihilator(64).unwrap();
        let v = a.apply(FockVector::basis(5, 64).unwrap().coeffs());
        for (i, z) in v.iter().enumerate() {
            let want = if i == 4 { 5f64.sqrt() } else { 0.0 };
            assert_eq!(*z, C64::from(want));
        }

        let ad = creation(16).unwrap();
        assert_eq!(ad, annihilator(16).unwrap().adjoint());
        let mut v = FockVector::basis(0, 16).unwrap().coeffs().clone();
        let mut fact = 1.0f64;
        for k in 1..16 {
            v = ad.apply(&v);
            fact *= k as f64;
            assert!((v[k] - C64::from(fact.sqrt())).norm() < 1e-9 * fact.sqrt());
            assert_eq!(v.iter().filter(|z| **z != ZERO).count(), 1);
        }
    }

    #[test]
    fn commutator_defect_three() {
        let d = commutator_defect(3).unwrap();
        assert_eq!(d.interior_dim, 2);
        for i in 0..3 {
            for j in 0..3 {
                let want = if (i, j) == (2, 2) { -3.0 } else { 0.0 };
                assert!((d.defect.entries()[(i, j)] - want).norm() < 1e-15);
            }
        }
        for m in 2..40 {
            assert_eq!(commutator_defect(m).unwrap().interior_dim, m - 1);
        }
    }

    #[test]
    fn shifted_commutators_reduce_to_bosonic() {
        let p = Params::reference();
        let dim = 12;
        let c_ = shifted_annihilator(C64::from(p.k), dim).unwrap();
        let cd = shifted_creation(C64::from(p.k), dim).unwrap();
        let a_ = shifted_annihilator(p.alpha, dim).unwrap();
        let ad = shifted_creation(p.alpha, dim).unwrap();
        let b_ = shifted_creation(p.beta, dim).unwrap();
        let bd = shifted_annihilator(p.beta, dim).unwrap();
        // the nine brackets as listed for the model; the three with B on the
        // left equal -1 since [a†, a] = -1
        let brackets = [
            (&c_, &cd, 1.0),
            (&c_, &ad, 1.0),
            (&c_, &b_, 1.0),
            (&a_, &cd, 1.0),
            (&a_, &ad, 1.0),
            (&a_, &b_, 1.0),
            (&b_, &c_, -1.0),
            (&b_, &a_, -1.0),
            (&b_, &bd, -1.0),
        ];
        for (x, y, sign) in brackets {
            let defect = (&(x * y) - &(y * x)).shifted(C64::from(-sign));
            assert!(defect.max_entry_on_block(dim - 1) < 1e-12);
            assert!(defect.max_entry_on_block(dim) > 1.0);
        }
    }

    #[test]
    fn exp_lowering_basics() {
        assert_eq!(exp_lowering(ZERO, 8).unwrap(), OperatorMatrix::identity(8).unwrap());
        let g = c(0.4, -1.1);
        let l = exp_lowering(g, 8).unwrap();
        let v = l.apply(FockVector::basis(1, 8).unwrap().coeffs());
        assert_eq!(v[0], g);
        assert_eq!(v[1], ONE);
        assert!(v.iter().skip(2).all(|z| *z == ZERO));
    }

    #[test]
    fn exp_lowering_matches_power_sum() {
        let g = c(0.7, 0.3);
        let dim = 10;
        let a = annihilator(dim).unwrap().scaled(g);
        let mut term = OperatorMatrix::identity(dim).unwrap();
        let mut sum = term.entries().clone();
        for j in 1..dim {
            term = (&term * &a).scaled(C64::from(1.0 / j as f64));
            sum += term.entries();
        }
        let l = exp_lowering(g, dim).unwrap();
        assert!((l.entries() - sum).map(|z| z.norm()).max() < 1e-13);
    }

    #[test]
    fn exp_raising_column_zero_and_tails() {
        let id = exp_raising(ZERO, 6).unwrap();
        assert_eq!(id.matrix, OperatorMatrix::identity(6).unwrap());
        assert!(id.tail_bounds.iter().all(|t| *t == 0.0));

        let d = c(0.6, 0.8);
        let r = exp_raising(d, 128).unwrap();
        let mut fact = 1.0f64;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let want = d.powu(k as u32) / fact.sqrt();
            assert!((r.matrix.entries()[(k, 0)] - want).norm() < 1e-14);
        }
        assert!(r.tail_bounds[0] < 1e-60);
    }

    #[test]
    fn raising_tail_bound_dominates_true_tail() {
        // brute-force the discarded rows in a much larger space
        let d = c(1.2, -0.5);
        let dim = 24;
        let big = exp_raising(d, 200).unwrap();
        let small = exp_raising(d, dim).unwrap();
        for n in 0..dim {
            let col = big.matrix.entries().column(n);
            let true_tail: f64 = col.rows(dim, 200 - dim).norm();
            let bound = small.tail_bounds[n];
            assert!(true_tail <= bound * (1.0 + 1e-12), "n={n}: {true_tail} > {bound}");
        }
    }

    #[test]
    fn displacement_identity_and_inverse() {
        assert!(
            displacement(ZERO, 16).unwrap().max_deviation_on_block(&OperatorMatrix::identity(16).unwrap(), 16)
                < 1e-15
        );
        let z = c(0.6, -0.7);
        let dim = 128;
        let d = displacement(z, dim).unwrap();
        let dm = displacement(-z, dim).unwrap();
        let id = OperatorMatrix::identity(dim).unwrap();
        assert!((&d * &dm).max_deviation_on_block(&id, dim / 2) < 1e-10);
        assert!((&d.adjoint() * &d).max_deviation_on_block(&id, dim / 2) < 1e-10);
    }

    #[test]
    fn normal_ordered_inverse_is_exact() {
        let op = NormalOrdered::intertwiner(c(0.3, 0.2), c(-0.5, 0.0));
        let dim = 40;
        let prod = &op.matrix(dim).unwrap() * &op.inverse_matrix(dim).unwrap();
        let id = OperatorMatrix::identity(dim).unwrap();
        assert!(prod.max_deviation_on_block(&id, dim) < 1e-10);
    }

    #[test]
    fn intertwiner_degenerates_to_displacement() {
        let a = c(0.3, 0.2);
        let v = intertwiner_v(a, a, 64).unwrap();
        let d = displacement(a, 64).unwrap();
        assert!(v.max_deviation_on_block(&d, 64) < 1e-12);
        assert_eq!(
            intertwiner_v(ZERO, ZERO, 8).unwrap(),
            OperatorMatrix::identity(8).unwrap()
        );
    }

    #[test]
    fn intertwiner_column_zero_is_displaced_vacuum() {
        let a = c(0.3, 0.2);
        let b = c(-0.5, 0.0);
        let dim = 64;
        let v = intertwiner_v(a, b, dim).unwrap();
        let d = displacement(a, dim).unwrap();
        let e0 = FockVector::basis(0, dim).unwrap();
        let lhs = v.apply(e0.coeffs());
        let rhs = d.apply(e0.coeffs());
        assert!((lhs - rhs).map(|z| z.norm()).max() < 1e-14);
    }

    #[test]
    fn norm_growth_list_validation() {
        let id = |m| OperatorMatrix::identity(m);
        assert!(matches!(
            truncated_norm_growth(id, &[4, 4]),
            Err(Error::TruncationList(_))
        ));
        assert!(truncated_norm_growth(id, &[1, 4]).is_err());
        let rows = truncated_norm_growth(id, &[2, 5, 9]).unwrap();
        assert!(rows.iter().all(|r| (r.norm - 1.0).abs() < 1e-14));
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(f64::NAN, ZERO, ZERO).is_err());
        assert!(Params::new(0.0, c(f64::INFINITY, 0.0), ZERO).is_err());
        assert!(Params::new(0.0, ZERO, c(0.0, f64::NAN)).is_err());
        let p = Params::new(0.0, ZERO, ONE).unwrap();
        assert!((p.mu() - C64::from(0.5f64.exp())).norm() < 1e-15);
    }
}
