//! Weak resolutions of the identity and the failure of `{φ_n}` to be a basis.
//!
//! The families expand well-behaved vectors, `⟨f,g⟩ = Σ ⟨f,φ_n⟩⟨Ψ_n,g⟩`, yet
//! the rank-one projections `P_n f = ⟨Ψ_n,f⟩ φ_n` have norms `‖φ_n‖‖Ψ_n‖`
//! that grow without bound. By uniform boundedness the partial-sum
//! operators cannot all be bounded by a common constant, so no expansion
//! converges for every vector of the space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::FamilyPair;
use crate::fock::{seeded_vectors, FockVector, C64};

/// First index from which `‖P_n‖` is required to increase strictly.
pub const GROWTH_THRESHOLD: usize = 2;

/// Support of the pinned random probe.
pub const RANDOM_PROBE_SUPPORT: usize = 11;

#[derive(Clone, Debug)]
pub struct Probe {
    pub label: String,
    pub vector: FockVector,
}

impl Probe {
    pub fn new(label: impl Into<String>, vector: FockVector) -> Self {
        Self {
            label: label.into(),
            vector,
        }
    }

    /// `e_n` labelled `e<n>`.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        Ok(Self::new(format!("e{n}"), FockVector::basis(n, dim)?))
    }
}

/// The fixed probe set: `e_0`, `e_2`, `φ_5`, `Ψ_3/‖Ψ_3‖` and a seeded random
/// unit vector on `e_0 .. e_10`. Needs `n_max ≥ 5`.
pub fn pinned_probes(fam: &FamilyPair, seed: u64) -> Result<Vec<Probe>> {
    if fam.n_max() < 5 {
        return Err(Error::Invariant(format!(
            "pinned probes use phi_5, family stops at n_max = {}",
            fam.n_max()
        )));
    }
    let dim = fam.dim();
    let random = seeded_vectors(seed, 1, RANDOM_PROBE_SUPPORT, dim)?.remove(0);
    Ok(vec![
        Probe::basis(0, dim)?,
        Probe::basis(2, dim)?,
        Probe::new("phi5", fam.phi()[5].clone()),
        Probe::new("psi3_unit", fam.psi()[3].normalized()),
        Probe::new(format!("random_seed{seed}"), random),
    ])
}

/// Which of the two equivalent orderings of the weak resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `Σ ⟨f,φ_n⟩⟨Ψ_n,g⟩`
    PhiPsi,
    /// `Σ ⟨f,Ψ_n⟩⟨φ_n,g⟩`
    PsiPhi,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub f_label: String,
    pub g_label: String,
    #[serde(skip)]
    pub target: C64,
    pub n_list: Vec<usize>,
    #[serde(skip)]
    pub phi_psi: Vec<C64>,
    #[serde(skip)]
    pub psi_phi: Vec<C64>,
    pub phi_psi_defects: Vec<f64>,
    pub psi_phi_defects: Vec<f64>,
}

impl ExpansionReport {
    pub fn defects(&self, order: Ordering) -> &[f64] {
        match order {
            Ordering::PhiPsi => &self.phi_psi_defects,
            Ordering::PsiPhi => &self.psi_phi_defects,
        }
    }

    /// First listed `N` whose defect is below `tolerance`.
    pub fn converged_at(&self, order: Ordering, tolerance: f64) -> Option<usize> {
        let d = self.defects(order);
        d.iter().position(|&x| x < tolerance).map(|i| self.n_list[i])
    }

    /// Whether defects never increase from `from` on, ignoring moves that
    /// stay below `floor` (rounding noise once a sum has converged).
    pub fn monotone_tail(&self, order: Ordering, from: usize, floor: f64) -> bool {
        let d = self.defects(order);
        let start = self.n_list.iter().position(|&n| n >= from).unwrap_or(d.len());
        d[start..].windows(2).all(|w| w[1] <= w[0] || w[1] <= floor)
    }

    /// `|S_N - S'_N|` at the last listed `N`.
    pub fn order_gap(&self) -> f64 {
        match (self.phi_psi.last(), self.psi_phi.last()) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => 0.0,
        }
    }
}

fn check_n_list(fam: &FamilyPair, n_list: &[usize]) -> Result<()> {
    let increasing = n_list.windows(2).all(|w| w[0] < w[1]);
    match n_list.last() {
        Some(&last) if increasing && last <= fam.n_max() => Ok(()),
        _ => Err(Error::Invariant(format!(
            "partial-sum indices must be strictly increasing and at most n_max = {}: {n_list:?}",
            fam.n_max()
        ))),
    }
}

/// Partial sums of both orderings of the weak resolution of `⟨f,g⟩`.
pub fn resolution_partial_sums(
    fam: &FamilyPair,
    f: &Probe,
    g: &Probe,
    n_list: &[usize],
) -> Result<ExpansionReport> {
    check_n_list(fam, n_list)?;
    let target = f.vector.inner(&g.vector);
    let (mut s1, mut s2) = (C64::from(0.0), C64::from(0.0));
    let (mut phi_psi, mut psi_phi) = (Vec::new(), Vec::new());
    let mut next = n_list.iter().peekable();
    for (n, (phi, psi)) in fam.phi().iter().zip(fam.psi()).enumerate() {
        s1 += f.vector.inner(phi) * psi.inner(&g.vector);
        s2 += f.vector.inner(psi) * phi.inner(&g.vector);
        if next.peek() == Some(&&n) {
            next.next();
            phi_psi.push(s1);
            psi_phi.push(s2);
        }
    }
    Ok(ExpansionReport {
        f_label: f.label.clone(),
        g_label: g.label.clone(),
        target,
        n_list: n_list.to_vec(),
        phi_psi_defects: phi_psi.iter().map(|s| (s - target).norm()).collect(),
        psi_phi_defects: psi_phi.iter().map(|s| (s - target).norm()).collect(),
        phi_psi,
        psi_phi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjectionRow {
    pub n: usize,
    pub phi_norm: f64,
    pub psi_norm: f64,
    /// `‖P_n‖ = ‖φ_n‖ ‖Ψ_n‖`
    pub projection_norm: f64,
}

/// `‖P_n‖` for `n ≤ n_max`. Fails when `α ≠ β` and the sequence is not
/// strictly increasing from [`GROWTH_THRESHOLD`] on.
pub fn projection_norms(fam: &FamilyPair) -> Result<Vec<ProjectionRow>> {
    let rows: Vec<ProjectionRow> = fam
        .phi()
        .iter()
        .zip(fam.psi())
        .enumerate()
        .map(|(n, (phi, psi))| ProjectionRow {
            n,
            phi_norm: phi.norm(),
            psi_norm: psi.norm(),
            projection_norm: phi.norm() * psi.norm(),
        })
        .collect();
    if !fam.params().is_degenerate() {
        if let Some(w) = rows
            .iter()
            .skip(GROWTH_THRESHOLD)
            .collect::<Vec<_>>()
            .windows(2)
            .find(|w| w[1].projection_norm <= w[0].projection_norm)
        {
            return Err(Error::Invariant(format!(
                "projection norm does not grow at n = {}: {} then {}",
                w[1].n, w[0].projection_norm, w[1].projection_norm
            )));
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeDefects {
    pub label: String,
    pub n_list: Vec<usize>,
    /// `‖Σ_{n≤N} ⟨Ψ_n,f⟩φ_n - f‖` for each listed `N`.
    pub defects: Vec<f64>,
}

/// The single term `P_n(f)` for the probe `f = Ψ_n/‖Ψ_n‖`, which has norm
/// `‖φ_n‖‖Ψ_n‖`: unit vectors exist on which the `n`-th projection alone is
/// as large as `‖P_n‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlignedRow {
    pub n: usize,
    pub single_term_norm: f64,
    pub projection_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisFailureReport {
    pub probes: Vec<ProbeDefects>,
    pub projections: Vec<ProjectionRow>,
    pub aligned: Vec<AlignedRow>,
    pub summary: String,
}

/// Expansion defects of the probes over `n_list`, together with the
/// projection norms and the aligned-probe evidence.
pub fn basis_failure_report(
    fam: &FamilyPair,
    probes: &[Probe],
    n_list: &[usize],
) -> Result<BasisFailureReport> {
    check_n_list(fam, n_list)?;
    let probe_rows = probes
        .iter()
        .map(|p| {
            let f = p.vector.coeffs();
            let mut partial = f * C64::from(0.0);
            let mut defects = Vec::with_capacity(n_list.len());
            let mut next = n_list.iter().peekable();
            for (n, (phi, psi)) in fam.phi().iter().zip(fam.psi()).enumerate() {
                partial += phi.coeffs() * psi.coeffs().dotc(f);
                if next.peek() == Some(&&n) {
                    next.next();
                    defects.push((&partial - f).norm());
                }
            }
            ProbeDefects {
                label: p.label.clone(),
                n_list: n_list.to_vec(),
                defects,
            }
        })
        .collect();

    let projections = projection_norms(fam)?;
    let aligned = fam
        .phi()
        .iter()
        .zip(fam.psi())
        .zip(&projections)
        .map(|((phi, psi), row)| {
            let f = psi.normalized();
            AlignedRow {
                n: row.n,
                single_term_norm: psi.inner(&f).norm() * phi.norm(),
                projection_norm: row.projection_norm,
            }
        })
        .collect();

    let first = projections.first().map_or(1.0, |r| r.projection_norm);
    let last = projections.last().map_or(1.0, |r| r.projection_norm);
    let summary = if fam.params().is_degenerate() {
        "alpha = beta: the families are orthonormal, every projection has norm 1 and the \
         expansion is an orthonormal basis expansion"
            .to_string()
    } else {
        format!(
            "The probes expand with shrinking defects, as expected for vectors in the dense \
             domain. The projection norms grow from {first:.6e} at n = 0 to {last:.6e} at \
             n = {}, and on the unit vector Psi_n/|Psi_n| the single term P_n already has \
             norm |P_n|. If every vector had a convergent expansion the partial-sum \
             operators would be uniformly bounded, and then so would the P_n; their growth \
             shows phi_n is not a basis. No individual divergent vector is exhibited.",
            fam.n_max()
        )
    };

    Ok(BasisFailureReport {
        probes: probe_rows,
        projections,
        aligned,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_family_pair, norm_sequence};
    use crate::fock::Params;

    fn reference() -> FamilyPair {
        build_family_pair(&Params::reference(), 30, 128, 1e-12).unwrap()
    }

    #[test]
    fn degenerate_vacuum_sum_is_exact() {
        let fam = build_family_pair(&Params::degenerate(0.0), 10, 64, 1e-12).unwrap();
        let e0 = Probe::basis(0, 64).unwrap();
        let r = resolution_partial_sums(&fam, &e0, &e0, &[0, 1, 5, 10]).unwrap();
        assert!(r.phi_psi_defects.iter().all(|&d| d < 1e-14));
    }

    #[test]
    fn low_basis_pairs_converge_in_both_orders() {
        let fam = reference();
        let n_list: Vec<usize> = (0..=30).collect();
        for i in 0..=5 {
            for j in 0..=5 {
                let f = Probe::basis(i, 128).unwrap();
                let g = Probe::basis(j, 128).unwrap();
                let r = resolution_partial_sums(&fam, &f, &g, &n_list).unwrap();
                for order in [Ordering::PhiPsi, Ordering::PsiPhi] {
                    let n = r.converged_at(order, 1e-6).expect("converges");
                    assert!(r.monotone_tail(order, n, 1e-13), "{i},{j} {order:?}");
                }
                assert!(r.order_gap() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_bad_index_lists() {
        let fam = reference();
        let e0 = Probe::basis(0, 128).unwrap();
        assert!(resolution_partial_sums(&fam, &e0, &e0, &[3, 2]).is_err());
        assert!(resolution_partial_sums(&fam, &e0, &e0, &[31]).is_err());
    }

    #[test]
    fn projection_norms_match_norm_oracle() {
        let fam = reference();
        let rows = projection_norms(&fam).unwrap();
        let norms = norm_sequence(&fam, 1e-10).unwrap();
        let g = (Params::reference().gap()).norm_sqr();
        for (r, nr) in rows.iter().zip(&norms) {
            let want = (nr.phi_norm_sq * nr.psi_norm_sq).sqrt();
            assert!((r.projection_norm - want).abs() < 1e-10 * want);
        }
        let bound = 1.0 + g * 30.0;
        assert!(rows[30].projection_norm / rows[0].projection_norm > bound);
    }

    #[test]
    fn degenerate_projections_are_unit() {
        let fam = build_family_pair(&Params::degenerate(0.7), 30, 128, 1e-12).unwrap();
        let rows = projection_norms(&fam).unwrap();
        assert!(rows.iter().all(|r| (r.projection_norm - 1.0).abs() < 1e-10));
    }

    #[test]
    fn failure_report_on_pinned_probes() {
        let fam = reference();
        let probes = pinned_probes(&fam, 7).unwrap();
        let n_list: Vec<usize> = (0..=30).collect();
        let rep = basis_failure_report(&fam, &probes, &n_list).unwrap();
        let phi5 = &rep.probes[2];
        assert!(phi5.defects[4] > 1e-3);
        assert!(phi5.defects[5] < 1e-10 * fam.phi()[5].norm());
        let e0 = &rep.probes[0];
        assert!(*e0.defects.last().unwrap() < 1e-6);
        for a in &rep.aligned {
            assert!((a.single_term_norm - a.projection_norm).abs() < 1e-10 * a.projection_norm);
        }
        assert!(rep.aligned[30].single_term_norm > fam.phi()[30].norm());
    }
}
