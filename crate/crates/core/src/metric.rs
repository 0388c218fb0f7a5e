//! The metric operator `Θ(α,β) = μ V(β,α) V⁻¹(α,β)`, which maps `φ_n` to
//! `Ψ_n`, intertwines `N` with `N†` and is positive on well-behaved vectors.
//!
//! With `δ = α - β`,
//! `Θ = e^{|α|²-|β|²} exp(δ̄ a) exp(δ a†) = e^{|α|²-|β|²+|δ|²} exp(δ a†) exp(δ̄ a)`.
//! The matrix kept here is the normal-ordered right-hand form, whose
//! truncation is `c · R Rᴴ` with `R` the truncated `exp(δ a†)`: Hermitian
//! and positive definite at every `M`. The inverse is
//! `e^{|β|²-|α|²} exp(-δ a†) exp(-δ̄ a)`, assembled from the negated factors
//! and never from a numerical inversion of `Θ`.

use nalgebra::linalg::Schur;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{FamilyPair, PseudoBosonPair};
use crate::precise;
use crate::fock::{
    check_dim, check_truncation_list, exp_lowering, exp_raising, FockVector, NormalOrdered,
    OperatorMatrix, Params, C64,
};

/// Entrywise agreement demanded of the alternative constructions of `Θ`,
/// relative to the largest entry of the interior block.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-10;

/// Normal-ordered `Θ` and `Θ⁻¹`.
fn metric_factors(params: &Params) -> (NormalOrdered, NormalOrdered) {
    let delta = params.alpha - params.beta;
    let c = params.alpha.norm_sqr() - params.beta.norm_sqr();
    let theta = NormalOrdered {
        scalar: C64::from((c + delta.norm_sqr()).exp()),
        raising: delta,
        lowering: delta.conj(),
    };
    let inverse = NormalOrdered {
        scalar: C64::from((-c).exp()),
        raising: -delta,
        lowering: -delta.conj(),
    };
    (theta, inverse)
}

/// `T(α,β) = V(α,β) V⁻¹(β,α)` from its closed form
/// `exp((αβ̄ - βᾱ + 2|β|² - 2|α|²)/2) exp(γ̄ a + γ a†)`, `γ = β - α`,
/// disentangled with the central factor `e^{|γ|²/2}`.
pub fn similarity_normal_ordered(params: &Params) -> NormalOrdered {
    let (a, b) = (params.alpha, params.beta);
    let gamma = b - a;
    let prefactor = 0.5 * (a * b.conj() - b * a.conj())
        + C64::from(b.norm_sqr() - a.norm_sqr() + 0.5 * gamma.norm_sqr());
    NormalOrdered {
        scalar: prefactor.exp(),
        raising: gamma,
        lowering: gamma.conj(),
    }
}

/// Truncated `Θ(α,β)` together with its exact-factor inverse.
#[derive(Clone, Debug)]
pub struct MetricOperator {
    params: Params,
    dim: usize,
    theta: OperatorMatrix,
    theta_inv: OperatorMatrix,
    /// `e^{|α|²-|β|²}` times any overall rescaling applied with [`Self::scaled`].
    scalar: C64,
}

impl MetricOperator {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> &OperatorMatrix {
        &self.theta
    }

    pub fn theta_inv(&self) -> &OperatorMatrix {
        &self.theta_inv
    }

    pub fn scalar(&self) -> C64 {
        self.scalar
    }

    /// Leading block on which operator identities are asserted.
    pub fn interior(&self) -> usize {
        self.dim / 2
    }

    /// `k Θ` for real `k ≠ 0`; conjugacy is unchanged, the normalization
    /// `⟨φ₀, Θφ₀⟩ = 1` is not.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Invariant(format!(
                "metric rescaling needs a finite non-zero real factor, got {k}"
            )));
        }
        Ok(Self {
            params: self.params,
            dim: self.dim,
            theta: self.theta.scaled(C64::from(k)),
            theta_inv: self.theta_inv.scaled(C64::from(1.0 / k)),
            scalar: self.scalar * k,
        })
    }

    /// `⟨f, Θ f⟩`.
    pub fn expectation(&self, f: &FockVector) -> C64 {
        f.coeffs().dotc(&self.theta.apply(f.coeffs()))
    }

    /// `max_{i,j < M/2} |Θ_{ij} - conj(Θ_{ji})|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.theta
            .max_deviation_on_block(&self.theta.adjoint(), self.interior())
    }

    /// `Θ Θ⁻¹ - 1` on the interior block, largest entry.
    ///
    /// The product is formed in double-double from the same factors; in
    /// `f64` the entry size of `Θ` alone leaves a floor near `10⁻⁶` at
    /// `M = 128`.
    pub fn inverse_defect(&self) -> f64 {
        let (normal, inverse) = metric_factors(&self.params);
        let k = precise::lift(self.scalar / inverse.scalar.inv());
        let theta = precise::normal_ordered(&normal, self.dim) * k;
        let theta_inv = precise::normal_ordered(&inverse, self.dim) / k;
        precise::max_deviation(&(theta * theta_inv), &precise::identity(self.dim), self.interior())
    }

    /// `max_n ‖Θφ_n - Ψ_n‖ / ‖Ψ_n‖`.
    pub fn intertwining_residual(&self, fam: &FamilyPair) -> f64 {
        fam.phi()
            .iter()
            .zip(fam.psi())
            .map(|(phi, psi)| (self.theta.apply(phi.coeffs()) - psi.coeffs()).norm() / psi.norm())
            .fold(0.0, f64::max)
    }
}

/// Builds `Θ(α,β)` and `Θ⁻¹`, and cross-validates `Θ` on the interior block
/// against the anti-normal product `e^{|α|²-|β|²} exp(δ̄a) exp(δa†)` and
/// against `μ V(β,α) V⁻¹(α,β)`.
pub fn build_theta(params: &Params, dim: usize) -> Result<MetricOperator> {
    let m = assemble(params, dim)?;
    cross_validate(&m)?;
    Ok(m)
}

fn assemble(params: &Params, dim: usize) -> Result<MetricOperator> {
    let (normal, inverse) = metric_factors(params);
    let theta = normal.matrix(dim)?;
    let theta_inv = inverse.matrix(dim)?;
    let scalar = inverse.scalar.inv();
    Ok(MetricOperator {
        params: *params,
        dim,
        theta,
        theta_inv,
        scalar,
    })
}

fn cross_validate(m: &MetricOperator) -> Result<()> {
    let (params, dim, theta, scalar) = (&m.params, m.dim, &m.theta, m.scalar);
    let interior = dim / 2;
    let scale = theta.max_entry_on_block(interior).max(1.0);

    let delta = params.alpha - params.beta;
    let anti_normal = (&exp_lowering(delta.conj(), dim)? * &exp_raising(delta, dim)?.matrix).scaled(scalar);
    let deviation = theta.max_deviation_on_block(&anti_normal, interior) / scale;
    if !(deviation <= CROSS_CHECK_TOLERANCE) {
        return Err(Error::CrossCheck {
            what: "metric operator against its anti-normal factorization",
            deviation,
            tolerance: CROSS_CHECK_TOLERANCE,
        });
    }

    let via_v = (&NormalOrdered::intertwiner(params.beta, params.alpha).matrix(dim)?
        * &NormalOrdered::intertwiner(params.alpha, params.beta).inverse_matrix(dim)?)
        .scaled(params.mu());
    let deviation = theta.max_deviation_on_block(&via_v, interior) / scale;
    if !(deviation <= CROSS_CHECK_TOLERANCE) {
        return Err(Error::CrossCheck {
            what: "metric operator against mu V(beta,alpha) V^-1(alpha,beta)",
            deviation,
            tolerance: CROSS_CHECK_TOLERANCE,
        });
    }

    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugacyResiduals {
    /// `max_f ‖Θ⁻¹B†Θf - Af‖ / ‖f‖`
    pub pair: f64,
    /// `max_f ‖Θ⁻¹N†Θf - Nf‖ / ‖f‖`
    pub number: f64,
}

/// Checks that `(A, B†)` and hence `(N, N†)` are `Θ`-conjugate on the test
/// vectors.
pub fn conjugacy_check(m: &MetricOperator, test_vectors: &[FockVector]) -> Result<ConjugacyResiduals> {
    let ops = PseudoBosonPair::new(&m.params, m.dim)?;
    let n_op = ops.number();
    let n_adj = ops.number_adjoint();
    let mut out = ConjugacyResiduals { pair: 0.0, number: 0.0 };
    for f in test_vectors {
        let theta_f = m.theta.apply(f.coeffs());
        let lhs = m.theta_inv.apply(&ops.b_dag.apply(&theta_f));
        let pair = (lhs - ops.a.apply(f.coeffs())).norm() / f.norm();
        let lhs = m.theta_inv.apply(&n_adj.apply(&theta_f));
        let number = (lhs - n_op.apply(f.coeffs())).norm() / f.norm();
        out.pair = out.pair.max(pair);
        out.number = out.number.max(number);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityRow {
    /// `Re ⟨f, Θf⟩` from the matrix.
    pub direct: f64,
    /// `|Im ⟨f, Θf⟩|`, zero up to rounding for a Hermitian `Θ`.
    pub direct_imag: f64,
    /// `e^{|α|²-|β|²} ‖exp((α-β) a†) f‖²`.
    pub factored: f64,
    /// `Σ_{n ≤ n_max} |⟨f, Ψ_n⟩|²`.
    pub expansion: f64,
    /// `|expansion - direct|`.
    pub expansion_defect: f64,
}

/// `⟨f, Θf⟩` three ways. Fails if either closed route is non-positive or
/// the two disagree by more than `tolerance` relative, which would mean the
/// truncation is too small for the probes or something is broken.
pub fn positivity_check(
    m: &MetricOperator,
    fam: &FamilyPair,
    test_vectors: &[FockVector],
    tolerance: f64,
) -> Result<Vec<PositivityRow>> {
    let delta = m.params.alpha - m.params.beta;
    let raising = exp_raising(delta, m.dim)?;
    test_vectors
        .iter()
        .map(|f| {
            let z = m.expectation(f);
            let factored = m.scalar.re * raising.matrix.apply(f.coeffs()).norm_squared();
            let expansion: f64 = fam.psi().iter().map(|psi| f.inner(psi).norm_sqr()).sum();
            let row = PositivityRow {
                direct: z.re,
                direct_imag: z.im.abs(),
                factored,
                expansion,
                expansion_defect: (expansion - z.re).abs(),
            };
            if !(row.direct > 0.0 && row.factored > 0.0) {
                return Err(Error::Invariant(format!(
                    "<f, Theta f> not positive: direct {}, factored {}",
                    row.direct, row.factored
                )));
            }
            let mismatch = (row.direct - row.factored).abs() / row.direct;
            if !(mismatch <= tolerance) {
                return Err(Error::Invariant(format!(
                    "<f, Theta f> routes disagree: direct {}, factored {}",
                    row.direct, row.factored
                )));
            }
            Ok(row)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimilarityResiduals {
    /// Size of the leading block the residuals are measured on.
    pub block: usize,
    /// `V⁻¹(α,β) N V(α,β) - n̂₀`
    pub intertwiner_number: f64,
    /// `V⁻¹(β,α) N† V(β,α) - n̂₀`
    pub intertwiner_number_adjoint: f64,
    /// `T⁻¹ N T - N†`
    pub similarity: f64,
    /// Closed form of `T` against `V(α,β) V⁻¹(β,α)`, relative to the
    /// largest entry.
    pub similarity_closed_form: f64,
}

/// Similarity relations on the leading `M/2` block, as largest entry
/// deviations. The products are evaluated in double-double (see
/// [`MetricOperator::inverse_defect`]).
pub fn similarity_check(params: &Params, dim: usize) -> Result<SimilarityResiduals> {
    check_dim(dim)?;
    let block = dim / 2;
    let a = precise::shifted_annihilator(params.alpha, dim);
    let a_dag = precise::shifted_creation(params.alpha, dim);
    let b = precise::shifted_creation(params.beta, dim);
    let b_dag = precise::shifted_annihilator(params.beta, dim);
    let n_op = &b * &a;
    let n_adj = &a_dag * &b_dag;
    let n0 = precise::shifted_creation(C64::from(0.0), dim) * precise::shifted_annihilator(C64::from(0.0), dim);

    let conjugated = |op: &NormalOrdered, x: &precise::MatrixDd| {
        precise::normal_ordered_inverse(op, dim) * x * precise::normal_ordered(op, dim)
    };
    let v = NormalOrdered::intertwiner(params.alpha, params.beta);
    let w = NormalOrdered::intertwiner(params.beta, params.alpha);
    let t = similarity_normal_ordered(params);
    let intertwiner_number = precise::max_deviation(&conjugated(&v, &n_op), &n0, block);
    let intertwiner_number_adjoint = precise::max_deviation(&conjugated(&w, &n_adj), &n0, block);
    let similarity = precise::max_deviation(&conjugated(&t, &n_op), &n_adj, block);

    let t_mat = t.matrix(dim)?;
    let product = &v.matrix(dim)? * &w.inverse_matrix(dim)?;
    let similarity_closed_form =
        t_mat.max_deviation_on_block(&product, block) / t_mat.max_entry_on_block(block).max(1.0);

    Ok(SimilarityResiduals {
        block,
        intertwiner_number,
        intertwiner_number_adjoint,
        similarity,
        similarity_closed_form,
    })
}

/// Eigenvalues of the leading `M/2` block of `N = BA`, ordered by real
/// part, first `count` of them.
pub fn number_spectrum(params: &Params, dim: usize, count: usize) -> Result<Vec<C64>> {
    let block = dim / 2;
    let n_op = PseudoBosonPair::new(params, dim)?.number().leading_block(block);
    let schur = Schur::try_new(n_op, f64::EPSILON, 0).ok_or_else(|| Error::Numerical {
        dim,
        what: "Schur decomposition of the number operator did not converge".into(),
    })?;
    let (_, t) = schur.unpack();
    // a complex Schur form is triangular
    let mut eig: Vec<C64> = (0..block).map(|i| t[(i, i)]).collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re));
    eig.truncate(count);
    Ok(eig)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricNormRow {
    pub dim: usize,
    pub norm_theta: f64,
    pub norm_theta_inv: f64,
}

/// Truncated spectral norms of `Θ` and `Θ⁻¹` across `dims`.
pub fn metric_norm_growth(params: &Params, dims: &[usize]) -> Result<Vec<MetricNormRow>> {
    check_truncation_list(dims)?;
    dims.iter()
        .map(|&dim| {
            // the anti-normal cross-check needs room below M/2; the norms
            // only involve the normal-ordered matrices, exact at every M
            let m = assemble(params, dim)?;
            Ok(MetricNormRow {
                dim,
                norm_theta: m.theta.spectral_norm()?,
                norm_theta_inv: m.theta_inv.spectral_norm()?,
            })
        })
        .collect()
}
