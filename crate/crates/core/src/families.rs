//! The eigenfamilies of the model.
//!
//! * `Φ_n = D(k) e_n`, orthonormal eigenvectors of `c†c`;
//! * `φ_n = V(α,β) e_n`, eigenvectors of `N = BA`;
//! * `Ψ_n = μ(α,β) V(β,α) e_n`, eigenvectors of `N† = A†B†`.
//!
//! `φ` and `Ψ` are biorthogonal, but for `α ≠ β` their norms diverge, so
//! they are not bases. Both are built twice: through the intertwiner `V`
//! and by repeated application of the raising operators `B`, `A†` to the
//! vacua. The two routes share nothing beyond the ladder matrices.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    ln_factorials, shifted_annihilator, shifted_creation, FockVector, NormalOrdered,
    OperatorMatrix, Params, C64,
};

/// Tail tolerance used when callers do not pick one.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Truncations of `A = a + α`, `A†`, `B = a† + β̄` and `B† = a + β`.
#[derive(Clone, Debug)]
pub struct PseudoBosonPair {
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub b: OperatorMatrix,
    pub b_dag: OperatorMatrix,
}

impl PseudoBosonPair {
    pub fn new(params: &Params, dim: usize) -> Result<Self> {
        Ok(Self {
            a: shifted_annihilator(params.alpha, dim)?,
            a_dag: shifted_creation(params.alpha, dim)?,
            b: shifted_creation(params.beta, dim)?,
            b_dag: shifted_annihilator(params.beta, dim)?,
        })
    }

    /// `N = BA`. The truncated product is the exact principal block since
    /// `a` never maps a discarded mode into the block.
    pub fn number(&self) -> OperatorMatrix {
        &self.b * &self.a
    }

    /// `N† = A†B†`.
    pub fn number_adjoint(&self) -> OperatorMatrix {
        &self.a_dag * &self.b_dag
    }
}

/// The biorthogonal pair `{φ_n}`, `{Ψ_n}` for `n ≤ n_max` at truncation `M`.
#[derive(Clone, Debug)]
pub struct FamilyPair {
    params: Params,
    n_max: usize,
    dim: usize,
    mu: C64,
    phi: Vec<FockVector>,
    psi: Vec<FockVector>,
}

impl FamilyPair {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn phi(&self) -> &[FockVector] {
        &self.phi
    }

    pub fn psi(&self) -> &[FockVector] {
        &self.psi
    }

    /// `⟨φ_n, Ψ_m⟩`, row `n`, column `m`.
    pub fn gram(&self) -> Vec<Vec<C64>> {
        self.phi
            .iter()
            .map(|p| self.psi.iter().map(|q| p.inner(q)).collect())
            .collect()
    }

    /// `max_{n,m ≤ upto} |⟨φ_n, Ψ_m⟩ - δ_{nm}|`.
    pub fn biorthogonality_defect(&self, upto: usize) -> f64 {
        let upto = upto.min(self.n_max);
        let mut worst = 0.0f64;
        for n in 0..=upto {
            for m in 0..=upto {
                let want = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((self.phi[n].inner(&self.psi[m]) - want).norm());
            }
        }
        worst
    }

    /// Largest coefficient deviation from another construction of the same
    /// family.
    pub fn max_deviation(&self, other: &FamilyPair) -> f64 {
        self.phi
            .iter()
            .zip(&other.phi)
            .chain(self.psi.iter().zip(&other.psi))
            .map(|(x, y)| (x.coeffs() - y.coeffs()).map(|z| z.norm()).max())
            .fold(0.0, f64::max)
    }

    pub fn max_tail_bound(&self) -> f64 {
        self.phi
            .iter()
            .chain(&self.psi)
            .map(FockVector::tail_bound)
            .fold(0.0, f64::max)
    }
}

fn interior_guard(n_max: usize, dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::Dimension(dim));
    }
    if 2 * n_max >= dim {
        return Err(Error::InteriorGuard { n_max, dim });
    }
    Ok(())
}

fn certified(v: DVector<C64>, tail: f64, index: usize, dim: usize, tolerance: f64) -> Result<FockVector> {
    if !(tail <= tolerance) {
        return Err(Error::TruncationTooSmall {
            index,
            dim,
            tail,
            tolerance,
        });
    }
    FockVector::new(v, tail)
}

/// `φ_n = V(α,β) e_n`, `Ψ_n = μ V(β,α) e_n`.
pub fn build_family_pair(
    params: &Params,
    n_max: usize,
    dim: usize,
    tail_tolerance: f64,
) -> Result<FamilyPair> {
    interior_guard(n_max, dim)?;
    let mu = params.mu();
    let v = NormalOrdered::intertwiner(params.alpha, params.beta);
    let w = NormalOrdered::intertwiner(params.beta, params.alpha);
    let v_mat = v.matrix(dim)?;
    let w_mat = w.matrix(dim)?;
    let v_tails = v.column_tail_bounds(dim)?;
    let w_tails = w.column_tail_bounds(dim)?;

    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        phi.push(certified(
            v_mat.entries().column(n).into_owned(),
            v_tails[n],
            n,
            dim,
            tail_tolerance,
        )?);
        psi.push(certified(
            w_mat.entries().column(n) * mu,
            w_tails[n] * mu.norm(),
            n,
            dim,
            tail_tolerance,
        )?);
    }
    Ok(FamilyPair {
        params: *params,
        n_max,
        dim,
        mu,
        phi,
        psi,
    })
}

/// `φ_n = Bⁿ φ₀ / √n!`, `Ψ_n = (A†)ⁿ Ψ₀ / √n!`, starting from the kernels
/// of `A` and `B†` solved coefficient by coefficient.
///
/// Both raising operators only move weight upward, so running the
/// recursion in a space of `M + n_max + 1` modes makes the leading `M`
/// coefficients exact and measures the spill past `M` directly. What lies
/// past the enlarged space is bounded through the coherent tail of the
/// vacuum.
pub fn build_ladder_family(
    params: &Params,
    n_max: usize,
    dim: usize,
    tail_tolerance: f64,
) -> Result<FamilyPair> {
    interior_guard(n_max, dim)?;
    let mu = params.mu();
    let ext = dim + n_max + 1;

    // A φ₀ = 0  ⇔  √(j+1) c_{j+1} = -α c_j
    let phi0 = kernel_vector(params.alpha, C64::from((-0.5 * params.alpha.norm_sqr()).exp()), ext);
    // B† Ψ₀ = 0  ⇔  √(j+1) c_{j+1} = -β c_j
    let psi_scale = mu * (-0.5 * params.beta.norm_sqr()).exp();
    let psi0 = kernel_vector(params.beta, psi_scale, ext);

    let b = shifted_creation(params.beta, ext)?;
    let a_dag = shifted_creation(params.alpha, ext)?;

    let phi = raise_orbit(
        &b,
        phi0,
        OrbitTail {
            vacuum_amp: params.alpha.norm(),
            vacuum_scale: (-0.5 * params.alpha.norm_sqr()).exp(),
            shift: params.beta.norm(),
        },
        n_max,
        dim,
        tail_tolerance,
    )?;
    let psi = raise_orbit(
        &a_dag,
        psi0,
        OrbitTail {
            vacuum_amp: params.beta.norm(),
            vacuum_scale: psi_scale.norm(),
            shift: params.alpha.norm(),
        },
        n_max,
        dim,
        tail_tolerance,
    )?;
    Ok(FamilyPair {
        params: *params,
        n_max,
        dim,
        mu,
        phi,
        psi,
    })
}

fn kernel_vector(shift: C64, c0: C64, len: usize) -> DVector<C64> {
    let mut v = DVector::zeros(len);
    v[0] = c0;
    for j in 0..len - 1 {
        v[j + 1] = -shift * v[j] / ((j + 1) as f64).sqrt();
    }
    v
}

/// Vacuum `s Σ (-z)^j/√j! e_j` with `|z| = vacuum_amp`, `s = vacuum_scale`,
/// raised by `a† + w̄` with `|w| = shift`.
struct OrbitTail {
    vacuum_amp: f64,
    vacuum_scale: f64,
    shift: f64,
}

impl OrbitTail {
    /// Bound on `‖(a† + w̄)ⁿ x‖ / √n!` for `x` the vacuum restricted to
    /// modes `≥ start`:
    /// `Σ_i C(n,i) |w|^{n-i} ‖(a†)^i x‖`, with
    /// `‖(a†)^i x‖² ≤ s² Σ_{j ≥ start} (j+i)^i |z|^{2j} / j!`.
    fn bound(&self, n: usize, start: usize, lnf: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut binom = 1.0;
        for i in 0..=n {
            if i > 0 {
                binom *= (n - i + 1) as f64 / i as f64;
            }
            let raised = weighted_coherent_tail(self.vacuum_amp, start, i, lnf);
            total += binom * self.shift.powi((n - i) as i32) * raised;
        }
        self.vacuum_scale * total * (-0.5 * lnf[n]).exp()
    }
}

/// `sqrt(Σ_{j ≥ start} (j+p)^p z^{2j} / j!)` bounded by a geometric series
/// from the first term (the term ratio decreases in `j`).
fn weighted_coherent_tail(z: f64, start: usize, p: usize, lnf: &[f64]) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let s = start as f64;
    let pf = p as f64;
    let ratio = (1.0 + 1.0 / (s + pf)).powf(pf) * z * z / (s + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_first = pf * (s + pf).ln() + 2.0 * s * z.ln() - lnf[start];
    (0.5 * (ln_first - (1.0 - ratio).ln())).exp()
}

fn raise_orbit(
    raise: &OperatorMatrix,
    vacuum: DVector<C64>,
    tail: OrbitTail,
    n_max: usize,
    dim: usize,
    tolerance: f64,
) -> Result<Vec<FockVector>> {
    let ext = vacuum.len();
    let lnf = ln_factorials(ext + n_max + 2);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = vacuum;
    for n in 0..=n_max {
        if n > 0 {
            cur = raise.apply(&cur) * C64::from(1.0 / (n as f64).sqrt());
        }
        let spill = cur.rows(dim, ext - dim).norm();
        let beyond = tail.bound(n, dim + 1, &lnf);
        out.push(certified(
            cur.rows(0, dim).into_owned(),
            spill + beyond,
            n,
            dim,
            tolerance,
        )?);
    }
    Ok(out)
}

/// `Φ_n = D(k) e_n` for `n ≤ n_max`.
pub fn shifted_family(k: f64, n_max: usize, dim: usize, tail_tolerance: f64) -> Result<Vec<FockVector>> {
    interior_guard(n_max, dim)?;
    let d = NormalOrdered::displacement(C64::from(k));
    let mat = d.matrix(dim)?;
    let tails = d.column_tail_bounds(dim)?;
    (0..=n_max)
        .map(|n| certified(mat.entries().column(n).into_owned(), tails[n], n, dim, tail_tolerance))
        .collect()
}

/// Residuals of the ladder and eigenvalue relations at one index, each
/// divided by the norm of the vector the operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    /// `‖Bφ_n - √(n+1) φ_{n+1}‖ / ‖φ_n‖`
    pub raising_phi: f64,
    /// `‖Aφ_n - √n φ_{n-1}‖ / ‖φ_n‖`
    pub lowering_phi: f64,
    /// `‖A†Ψ_n - √(n+1) Ψ_{n+1}‖ / ‖Ψ_n‖`
    pub raising_psi: f64,
    /// `‖B†Ψ_n - √n Ψ_{n-1}‖ / ‖Ψ_n‖`
    pub lowering_psi: f64,
    /// `‖Nφ_n - nφ_n‖ / ‖φ_n‖`
    pub number_phi: f64,
    /// `‖N†Ψ_n - nΨ_n‖ / ‖Ψ_n‖`
    pub number_psi: f64,
}

impl LadderRow {
    pub fn worst(&self) -> f64 {
        [
            self.raising_phi,
            self.lowering_phi,
            self.raising_psi,
            self.lowering_psi,
            self.number_phi,
            self.number_psi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderResiduals {
    pub rows: Vec<LadderRow>,
}

impl LadderResiduals {
    pub fn max_ladder(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                r.raising_phi
                    .max(r.lowering_phi)
                    .max(r.raising_psi)
                    .max(r.lowering_psi)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_number(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.number_phi.max(r.number_psi))
            .fold(0.0, f64::max)
    }
}

/// Ladder relations `Bφ_n = √(n+1)φ_{n+1}`, `Aφ_n = √n φ_{n-1}`,
/// `A†Ψ_n = √(n+1)Ψ_{n+1}`, `B†Ψ_n = √n Ψ_{n-1}` and the eigenvalue
/// equations of `N`, `N†`, for `n < n_max`.
pub fn ladder_check(fam: &FamilyPair) -> Result<LadderResiduals> {
    let ops = PseudoBosonPair::new(&fam.params, fam.dim)?;
    let number = ops.number();
    let number_adj = ops.number_adjoint();
    let phi = &fam.phi;
    let psi = &fam.psi;
    let zero = DVector::<C64>::zeros(fam.dim);

    let rel = |op: &OperatorMatrix, v: &FockVector, coef: f64, target: &DVector<C64>| {
        (op.apply(v.coeffs()) - target * C64::from(coef)).norm() / v.norm()
    };
    let rows = (0..fam.n_max)
        .map(|n| {
            let up = ((n + 1) as f64).sqrt();
            let down = (n as f64).sqrt();
            let phi_down = if n == 0 { &zero } else { phi[n - 1].coeffs() };
            let psi_down = if n == 0 { &zero } else { psi[n - 1].coeffs() };
            LadderRow {
                n,
                raising_phi: rel(&ops.b, &phi[n], up, phi[n + 1].coeffs()),
                lowering_phi: rel(&ops.a, &phi[n], down, phi_down),
                raising_psi: rel(&ops.a_dag, &psi[n], up, psi[n + 1].coeffs()),
                lowering_psi: rel(&ops.b_dag, &psi[n], down, psi_down),
                number_phi: rel(&number, &phi[n], n as f64, phi[n].coeffs()),
                number_psi: rel(&number_adj, &psi[n], n as f64, psi[n].coeffs()),
            }
        })
        .collect();
    Ok(LadderResiduals { rows })
}

/// `Σ_{j=0}^{n} C(n,j) g^j / j!`, the squared norm of `exp(γa) e_n` with
/// `g = |γ|²`, read off the finite expansion of `exp(γa) e_n`.
pub fn lowering_orbit_norm_sq(gap_abs_sq: f64, n: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=n {
        term *= (n - j + 1) as f64 / j as f64 * gap_abs_sq / j as f64;
        sum += term;
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub n: usize,
    pub phi_norm_sq: f64,
    pub psi_norm_sq: f64,
    /// `1 + |β-α|² n`
    pub lower_bound: f64,
    /// `|μ|² (1 + |β-α|² n)`; `Ψ_n = μ V(β,α) e_n` obeys the same estimate
    /// up to the normalization.
    pub psi_lower_bound: f64,
}

/// Squared norms of both families against the linear lower bound.
///
/// Fails with an invariant violation if `‖φ_n‖² < (1 + |β-α|² n)(1 - tolerance)`
/// at any `n`, or the analogous estimate for `Ψ_n`.
pub fn norm_sequence(fam: &FamilyPair, tolerance: f64) -> Result<Vec<NormRow>> {
    let g = fam.params.gap().norm_sqr();
    let mu_sq = fam.mu.norm_sqr();
    let rows: Vec<NormRow> = (0..=fam.n_max)
        .map(|n| {
            let lower_bound = 1.0 + g * n as f64;
            NormRow {
                n,
                phi_norm_sq: fam.phi[n].norm_squared(),
                psi_norm_sq: fam.psi[n].norm_squared(),
                lower_bound,
                psi_lower_bound: mu_sq * lower_bound,
            }
        })
        .collect();
    for r in &rows {
        if r.phi_norm_sq < r.lower_bound * (1.0 - tolerance) {
            return Err(Error::Invariant(format!(
                "|phi_{}|^2 = {} below lower bound {}",
                r.n, r.phi_norm_sq, r.lower_bound
            )));
        }
        if r.psi_norm_sq < r.psi_lower_bound * (1.0 - tolerance) {
            return Err(Error::Invariant(format!(
                "|psi_{}|^2 = {} below lower bound {}",
                r.n, r.psi_norm_sq, r.psi_lower_bound
            )));
        }
    }
    Ok(rows)
}
