//! The seven experiment suites and the runner that emits their reports.
//!
//! Every suite is a pure function of the configuration. A computation that
//! fails inside a suite (a truncation that cannot certify a tail, a cross
//! check that does not close) becomes a failing assertion with the error
//! text in the notes, so a report is always written.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::families::{
    build_family_pair, build_ladder_family, ladder_check, lowering_orbit_norm_sq, norm_sequence,
    shifted_family, FamilyPair, DEFAULT_TAIL_TOLERANCE,
};
use crate::fock::{
    commutator_defect, seeded_vectors, truncated_norm_growth, FockVector, NormalOrdered,
    OperatorMatrix, Params, C64,
};
use crate::hermite::{gauss_hermite, hermite_function, synthesize, vacuum_phi0, vacuum_psi0};
use crate::metric::{
    build_theta, conjugacy_check, metric_norm_growth, number_spectrum, positivity_check,
    similarity_check,
};
use crate::quasi_basis::{
    basis_failure_report, pinned_probes, projection_norms, resolution_partial_sums, Ordering, Probe,
    RANDOM_PROBE_SUPPORT,
};
use crate::report::{emit_report, Assertion, Cell, ExperimentReport, Format, Relation, Table};

/// Fixed tolerances, independent of the configured one.
pub mod bounds {
    pub const BIORTHOGONALITY_UPTO: usize = 15;
    pub const LADDER_UPTO: usize = 14;
    pub const NORM_ORACLE: f64 = 1e-10;
    /// Slack for `‖φ_n‖² ≥ 1 + |β-α|² n`, which is an equality at `n ≤ 1`.
    pub const NORM_BOUND_ROUNDING: f64 = 1e-12;
    pub const HERMITICITY: f64 = 1e-10;
    pub const METRIC_NORMALIZATION: f64 = 1e-10;
    pub const METRIC_INVERSE: f64 = 1e-10;
    pub const CONJUGACY_SUPPORT: usize = 11;
    pub const POSITIVITY_TRIALS: usize = 50;
    pub const SIMILARITY: f64 = 1e-6;
    pub const SIMILARITY_CLOSED_FORM: f64 = 1e-10;
    pub const SPECTRUM_COUNT: usize = 21;
    pub const SPECTRUM: f64 = 1e-6;
    pub const RESOLUTION: f64 = 1e-6;
    pub const RESOLUTION_PROBES: usize = 6;
    pub const MONOTONE_FLOOR: f64 = 1e-13;
    pub const TRANSLATION: f64 = 1e-8;
    pub const TRANSLATION_UPTO: usize = 10;
    pub const UNIT_NORM: f64 = 1e-10;
    pub const DEGENERATE_IDENTITY: f64 = 1e-12;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Family,
    Ladder,
    Norms,
    Metric,
    Similarity,
    QuasiBasis,
    Growth,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Family,
        Suite::Ladder,
        Suite::Norms,
        Suite::Metric,
        Suite::Similarity,
        Suite::QuasiBasis,
        Suite::Growth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Family => "family",
            Suite::Ladder => "ladder",
            Suite::Norms => "norms",
            Suite::Metric => "metric",
            Suite::Similarity => "similarity",
            Suite::QuasiBasis => "quasi-basis",
            Suite::Growth => "growth",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Records a failed computation as a failing assertion and keeps going.
fn attempt<T>(r: &mut ExperimentReport, name: &str, property: &str, res: Result<T>) -> Option<T> {
    match res {
        Ok(v) => Some(v),
        Err(e) => {
            r.assert(Assertion::holds(name, property, false));
            r.notes.push(format!("{name}: {e}"));
            None
        }
    }
}

fn family(r: &mut ExperimentReport, cfg: &ExperimentConfig, params: &Params) -> Option<FamilyPair> {
    attempt(
        r,
        "family_construction",
        "certified truncation",
        build_family_pair(params, cfg.n_max, cfg.truncation, DEFAULT_TAIL_TOLERANCE),
    )
}

fn unit_overlap(a: &FockVector, b: &FockVector) -> f64 {
    a.inner(b).norm() / (a.norm() * b.norm())
}

fn max_identity_deviation(m: &OperatorMatrix, block: usize) -> Result<f64> {
    Ok(m.max_deviation_on_block(&OperatorMatrix::identity(m.dim())?, block))
}

pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut r = ExperimentReport::new(suite.name(), cfg);
    match suite {
        Suite::Family => family_suite(&mut r, cfg),
        Suite::Ladder => ladder_suite(&mut r, cfg),
        Suite::Norms => norms_suite(&mut r, cfg),
        Suite::Metric => metric_suite(&mut r, cfg),
        Suite::Similarity => similarity_suite(&mut r, cfg),
        Suite::QuasiBasis => quasi_basis_suite(&mut r, cfg),
        Suite::Growth => growth_suite(&mut r, cfg),
    }
    Ok(r)
}

fn family_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    let p = cfg.params;
    let tol = cfg.tolerance;
    let Some(fam) = family(r, cfg, &p) else { return };

    let upto = bounds::BIORTHOGONALITY_UPTO.min(cfg.n_max);
    r.assert(Assertion::below(
        format!("biorthogonality_n_le_{upto}"),
        "biorthogonality",
        fam.biorthogonality_defect(upto),
        tol,
    ));
    let mut gram = Table::new("gram", &["n", "m", "re", "im"]);
    for (n, row) in fam.gram().iter().enumerate() {
        for (m, z) in row.iter().enumerate() {
            gram.push(vec![n.into(), m.into(), z.re.into(), z.im.into()]);
        }
    }
    r.tables.push(gram);

    r.assert(Assertion::new(
        "tail_certificate",
        "certified truncation",
        fam.max_tail_bound(),
        Relation::LessEq,
        DEFAULT_TAIL_TOLERANCE,
    ));
    if let Some(ladder) = attempt(
        r,
        "ladder_construction",
        "two constructions of the families",
        build_ladder_family(&p, cfg.n_max, cfg.truncation, DEFAULT_TAIL_TOLERANCE),
    ) {
        r.assert(Assertion::below(
            "ladder_route_vs_intertwiner_route",
            "two constructions of the families",
            fam.max_deviation(&ladder),
            tol,
        ));
    }

    let Some(grid) = attempt(r, "quadrature", "coordinate picture", gauss_hermite(cfg.quadrature_order))
    else {
        return;
    };
    let phi0 = vacuum_phi0(&p);
    let psi0 = vacuum_psi0(&p);
    let mut vac = Table::new("coordinate_vacua", &["vector", "overlap_abs", "phase_re", "phase_im"]);
    for (label, f, fock) in [("phi0", &phi0, &fam.phi()[0]), ("psi0", &psi0, &fam.psi()[0])] {
        if let Some(proj) = attempt(r, "vacuum_projection", "coordinate vacuum", f.project(&grid, cfg.truncation)) {
            let overlap = unit_overlap(&proj, fock);
            let z = fock.inner(&proj);
            let phase = z / z.norm();
            vac.push(vec![label.into(), overlap.into(), phase.re.into(), phase.im.into()]);
            r.assert(Assertion::below(
                format!("coordinate_{label}_matches_fock"),
                "coordinate vacuum",
                (1.0 - overlap).abs(),
                tol,
            ));
        }
    }
    r.tables.push(vac);
    r.notes.push(
        "The closed-form coordinate vacuum phi0 carries a positive real normalization; it equals \
         the Fock-space vector V(alpha,beta)e0 up to a unit phase, listed in coordinate_vacua."
            .into(),
    );
    let pairing = grid.inner(&phi0.sample(&grid), &psi0.sample(&grid));
    r.assert(Assertion::below(
        "coordinate_vacuum_pairing",
        "biorthogonality",
        (pairing - C64::from(1.0)).norm(),
        tol,
    ));

    degenerate_translation(r, cfg, &grid);
}

fn degenerate_translation(r: &mut ExperimentReport, cfg: &ExperimentConfig, grid: &crate::hermite::QuadratureGrid) {
    let k = cfg.params.k;
    let upto = bounds::TRANSLATION_UPTO.min(cfg.n_max);
    let Some(shifted) = attempt(
        r,
        "shifted_family",
        "translation identity",
        shifted_family(k, upto, cfg.truncation, DEFAULT_TAIL_TOLERANCE),
    ) else {
        return;
    };
    let shift = std::f64::consts::SQRT_2 * k;
    let mut worst = 0.0_f64;
    let mut table = Table::new("translation", &["n", "max_abs_deviation", "norm"]);
    for (n, v) in shifted.iter().enumerate() {
        let Some(samples) = attempt(r, "synthesis", "translation identity", synthesize(v, grid)) else {
            return;
        };
        let mut dev = 0.0_f64;
        for (x, s) in grid.nodes().iter().zip(&samples) {
            match hermite_function(n, C64::from(x + shift)) {
                Ok(e) => dev = dev.max((s - e).norm()),
                Err(_) => dev = f64::NAN,
            }
        }
        worst = if dev.is_nan() { f64::NAN } else { worst.max(dev) };
        table.push(vec![n.into(), dev.into(), v.norm().into()]);
    }
    r.tables.push(table);
    r.assert(Assertion::below(
        format!("translation_identity_n_le_{upto}"),
        "translation identity",
        worst,
        bounds::TRANSLATION,
    ));
    r.assert(Assertion::below(
        "shifted_family_unit_norms",
        "degenerate regression",
        shifted.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max),
        bounds::UNIT_NORM,
    ));

    let degenerate = Params::degenerate(k);
    if let Some(fam) = family(r, cfg, &degenerate) {
        let dev = fam
            .phi()
            .iter()
            .zip(fam.psi())
            .zip(&shifted)
            .map(|((phi, psi), s)| {
                (phi.coeffs() - s.coeffs()).norm().max((psi.coeffs() - s.coeffs()).norm())
            })
            .fold(0.0, f64::max);
        r.assert(Assertion::below(
            "degenerate_families_coincide",
            "degenerate regression",
            dev,
            bounds::DEGENERATE_IDENTITY,
        ));
    }
}

fn ladder_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    if let Some(c) = attempt(r, "commutator", "canonical commutator", commutator_defect(cfg.truncation)) {
        r.assert(Assertion::new(
            "commutator_interior_dim",
            "canonical commutator",
            c.interior_dim as f64,
            Relation::GreaterEq,
            (cfg.truncation - 1) as f64,
        ));
    }
    let Some(fam) = family(r, cfg, &cfg.params) else { return };
    let Some(res) = attempt(r, "ladder_check", "ladder relations", ladder_check(&fam)) else {
        return;
    };
    let mut table = Table::new(
        "ladder",
        &["n", "raising_phi", "lowering_phi", "raising_psi", "lowering_psi", "number_phi", "number_psi"],
    );
    for row in &res.rows {
        table.push(vec![
            row.n.into(),
            row.raising_phi.into(),
            row.lowering_phi.into(),
            row.raising_psi.into(),
            row.lowering_psi.into(),
            row.number_phi.into(),
            row.number_psi.into(),
        ]);
    }
    r.tables.push(table);
    let upto = bounds::LADDER_UPTO;
    let within = res.rows.iter().filter(|row| row.n <= upto);
    let (ladder, number) = within.fold((0.0_f64, 0.0_f64), |(l, n), row| {
        (
            l.max(row.raising_phi).max(row.lowering_phi).max(row.raising_psi).max(row.lowering_psi),
            n.max(row.number_phi).max(row.number_psi),
        )
    });
    r.assert(Assertion::below(format!("ladder_relations_n_le_{upto}"), "ladder relations", ladder, cfg.tolerance));
    r.assert(Assertion::below(format!("eigenvalue_equations_n_le_{upto}"), "eigenvalue equations", number, cfg.tolerance));
}

fn norms_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    let Some(fam) = family(r, cfg, &cfg.params) else { return };
    // the bound is re-checked below with an explicit slack, so no tolerance here
    let Some(rows) = attempt(r, "norm_sequence", "norm lower bound", norm_sequence(&fam, f64::INFINITY)) else {
        return;
    };
    let g = cfg.params.gap().norm_sqr();
    let mu_sq = fam.mu().norm_sqr();
    let mut table = Table::new(
        "norms",
        &["n", "phi_norm_sq", "psi_norm_sq", "oracle", "lower_bound", "psi_lower_bound"],
    );
    let (mut slack, mut psi_slack, mut oracle_dev) = (f64::INFINITY, f64::INFINITY, 0.0_f64);
    for row in &rows {
        let oracle = lowering_orbit_norm_sq(g, row.n);
        slack = slack.min(row.phi_norm_sq / row.lower_bound - 1.0);
        psi_slack = psi_slack.min(row.psi_norm_sq / row.psi_lower_bound - 1.0);
        oracle_dev = oracle_dev
            .max((row.phi_norm_sq - oracle).abs() / oracle)
            .max((row.psi_norm_sq - mu_sq * oracle).abs() / (mu_sq * oracle));
        table.push(vec![
            row.n.into(),
            row.phi_norm_sq.into(),
            row.psi_norm_sq.into(),
            oracle.into(),
            row.lower_bound.into(),
            row.psi_lower_bound.into(),
        ]);
    }
    r.tables.push(table);
    r.assert(Assertion::new(
        "phi_norm_lower_bound",
        "norm lower bound",
        slack,
        Relation::GreaterEq,
        -bounds::NORM_BOUND_ROUNDING,
    ));
    r.assert(Assertion::new(
        "psi_norm_lower_bound",
        "norm lower bound",
        psi_slack,
        Relation::GreaterEq,
        -bounds::NORM_BOUND_ROUNDING,
    ));
    r.assert(Assertion::below("finite_sum_norm_oracle", "finite-sum norm identity", oracle_dev, bounds::NORM_ORACLE));
    if cfg.params.is_degenerate() {
        r.notes.push("alpha = beta: every family member has unit norm".into());
    }
}

fn metric_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    let p = cfg.params;
    let tol = cfg.tolerance;
    let dim = cfg.truncation;
    let Some(m) = attempt(r, "metric_construction", "metric operator", build_theta(&p, dim)) else {
        return;
    };
    let Some(fam) = family(r, cfg, &p) else { return };

    r.assert(Assertion::below("psi_equals_theta_phi", "metric intertwining", m.intertwining_residual(&fam), tol));
    r.assert(Assertion::below("theta_hermitian", "metric self-adjointness", m.hermiticity_defect(), bounds::HERMITICITY));
    let vac = m.expectation(&fam.phi()[0]);
    r.assert(Assertion::below(
        "theta_vacuum_expectation",
        "metric normalization",
        (vac - C64::from(1.0)).norm(),
        bounds::METRIC_NORMALIZATION,
    ));
    r.assert(Assertion::below("theta_times_inverse", "metric inverse", m.inverse_defect(), bounds::METRIC_INVERSE));

    let basis: Vec<FockVector> = (0..bounds::CONJUGACY_SUPPORT)
        .filter_map(|n| FockVector::basis(n, dim).ok())
        .collect();
    if let Some(c) = attempt(r, "conjugacy", "theta-conjugacy", conjugacy_check(&m, &basis)) {
        r.assert(Assertion::below("conjugacy_pair", "theta-conjugacy", c.pair, tol));
        r.assert(Assertion::below("conjugacy_number", "theta-conjugacy", c.number, tol));
        if let Some(scaled) = attempt(r, "rescaled_metric", "metric rescaling", m.scaled(2.0)) {
            if let Some(cs) = attempt(r, "rescaled_conjugacy", "metric rescaling", conjugacy_check(&scaled, &basis)) {
                r.assert(Assertion::below(
                    "rescaled_conjugacy_unchanged",
                    "metric rescaling",
                    (cs.pair - c.pair).abs().max((cs.number - c.number).abs()),
                    tol,
                ));
            }
            r.assert(Assertion::below(
                "rescaled_vacuum_expectation",
                "metric rescaling",
                (scaled.expectation(&fam.phi()[0]) - C64::from(2.0)).norm(),
                2.0 * bounds::METRIC_NORMALIZATION,
            ));
        }
    }

    let vectors = seeded_vectors(cfg.probe_seed, bounds::POSITIVITY_TRIALS, RANDOM_PROBE_SUPPORT, dim);
    if let Some(vectors) = attempt(r, "positivity_vectors", "metric positivity", vectors) {
        if let Some(rows) = attempt(r, "positivity", "metric positivity", positivity_check(&m, &fam, &vectors, tol)) {
            let mut table = Table::new(
                "positivity",
                &["trial", "direct", "direct_imag", "factored", "expansion", "expansion_defect"],
            );
            for (i, row) in rows.iter().enumerate() {
                table.push(vec![
                    i.into(),
                    row.direct.into(),
                    row.direct_imag.into(),
                    row.factored.into(),
                    row.expansion.into(),
                    row.expansion_defect.into(),
                ]);
            }
            r.tables.push(table);
            let min_direct = rows.iter().map(|x| x.direct).fold(f64::INFINITY, f64::min);
            let min_factored = rows.iter().map(|x| x.factored).fold(f64::INFINITY, f64::min);
            let expansion = rows
                .iter()
                .map(|x| x.expansion_defect / x.direct)
                .fold(0.0, f64::max);
            r.assert(Assertion::above("positivity_direct_min", "metric positivity", min_direct, 0.0));
            r.assert(Assertion::above("positivity_factored_min", "metric positivity", min_factored, 0.0));
            // depends on n_max, so it is reported rather than asserted
            r.notes.push(format!(
                "largest relative gap between <f, Theta f> and sum_(n <= n_max) |<f, Psi_n>|^2: {}",
                crate::report::format_float(expansion)
            ));
        }
    }

    let degenerate = Params::degenerate(p.k);
    if let Some(d) = attempt(r, "degenerate_metric", "degenerate regression", build_theta(&degenerate, dim)) {
        if let Some(dev) = attempt(r, "degenerate_metric", "degenerate regression", max_identity_deviation(d.theta(), dim)) {
            r.assert(Assertion::below("degenerate_theta_identity", "degenerate regression", dev, bounds::DEGENERATE_IDENTITY));
        }
    }
}

fn similarity_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    let p = cfg.params;
    if let Some(s) = attempt(r, "similarity", "similarity", similarity_check(&p, cfg.truncation)) {
        r.assert(Assertion::below("intertwiner_number", "similarity", s.intertwiner_number, bounds::SIMILARITY));
        r.assert(Assertion::below(
            "intertwiner_number_adjoint",
            "similarity",
            s.intertwiner_number_adjoint,
            bounds::SIMILARITY,
        ));
        r.assert(Assertion::below("similarity_number_to_adjoint", "similarity", s.similarity, bounds::SIMILARITY));
        r.assert(Assertion::below(
            "similarity_closed_form",
            "similarity",
            s.similarity_closed_form,
            bounds::SIMILARITY_CLOSED_FORM,
        ));
        let mut table = Table::new("similarity", &["block", "relation", "residual"]);
        for (name, v) in [
            ("V^-1 N V - n0", s.intertwiner_number),
            ("V(beta,alpha)^-1 N^dagger V(beta,alpha) - n0", s.intertwiner_number_adjoint),
            ("T^-1 N T - N^dagger", s.similarity),
            ("T closed form - V(alpha,beta) V(beta,alpha)^-1", s.similarity_closed_form),
        ] {
            table.push(vec![s.block.into(), name.into(), v.into()]);
        }
        r.tables.push(table);
    }
    let count = bounds::SPECTRUM_COUNT;
    if let Some(eig) = attempt(r, "spectrum", "integer spectrum", number_spectrum(&p, cfg.truncation, count)) {
        let mut table = Table::new("spectrum", &["n", "re", "im", "deviation"]);
        let mut worst = if eig.len() < count { f64::NAN } else { 0.0 };
        for (n, z) in eig.iter().enumerate() {
            let dev = (z - C64::from(n as f64)).norm();
            worst = worst.max(dev);
            table.push(vec![n.into(), z.re.into(), z.im.into(), dev.into()]);
        }
        r.tables.push(table);
        r.assert(Assertion::below(format!("spectrum_first_{count}"), "integer spectrum", worst, bounds::SPECTRUM));
    }
    if p.is_degenerate() {
        r.notes.push("alpha = beta: T is the identity and N is unitarily similar to the number operator".into());
    }
}

fn quasi_basis_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    let dim = cfg.truncation;
    let Some(fam) = family(r, cfg, &cfg.params) else { return };
    let n_list: Vec<usize> = (0..=cfg.n_max).collect();

    let probes: Vec<Probe> = (0..bounds::RESOLUTION_PROBES)
        .filter_map(|n| Probe::basis(n, dim).ok())
        .collect();
    let mut table = Table::new("resolution", &["f", "g", "N", "phi_psi_defect", "psi_phi_defect"]);
    let mut order_gap = 0.0_f64;
    let mut monotone_failures: Vec<String> = Vec::new();
    for f in &probes {
        for g in &probes {
            let Some(rep) = attempt(r, "resolution", "weak resolution of the identity", resolution_partial_sums(&fam, f, g, &n_list)) else {
                return;
            };
            for (i, n) in rep.n_list.iter().enumerate() {
                table.push(vec![
                    f.label.clone().into(),
                    g.label.clone().into(),
                    (*n).into(),
                    rep.phi_psi_defects[i].into(),
                    rep.psi_phi_defects[i].into(),
                ]);
            }
            for (order, tag) in [(Ordering::PhiPsi, "phi_psi"), (Ordering::PsiPhi, "psi_phi")] {
                let at = rep.converged_at(order, bounds::RESOLUTION);
                let best = rep.defects(order).iter().copied().fold(f64::INFINITY, f64::min);
                r.assert(Assertion::below(
                    format!("resolution_{tag}_{}_{}", f.label, g.label),
                    "weak resolution of the identity",
                    best,
                    bounds::RESOLUTION,
                ));
                if let Some(n) = at {
                    if !rep.monotone_tail(order, n, bounds::MONOTONE_FLOOR) {
                        monotone_failures.push(format!("{tag} {} {}", f.label, g.label));
                    }
                }
            }
            order_gap = order_gap.max(rep.order_gap());
        }
    }
    r.tables.push(table);
    r.assert(Assertion::holds("resolution_monotone_tail", "weak resolution of the identity", monotone_failures.is_empty()));
    for m in monotone_failures {
        r.notes.push(format!("defect tail not monotone: {m}"));
    }
    r.assert(Assertion::below("resolution_order_symmetry", "weak resolution of the identity", order_gap, bounds::RESOLUTION));

    let Some(projections) = attempt(r, "projection_norms", "projection-norm divergence", projection_norms(&fam)) else {
        return;
    };
    if cfg.params.is_degenerate() {
        let dev = projections.iter().map(|p| (p.projection_norm - 1.0).abs()).fold(0.0, f64::max);
        r.assert(Assertion::below("projection_norms_unit", "projection-norm divergence", dev, bounds::UNIT_NORM));
    } else {
        r.assert(Assertion::holds("projection_norms_increasing", "projection-norm divergence", true));
        let g = cfg.params.gap().norm_sqr();
        let ratio = projections[cfg.n_max].projection_norm / projections[0].projection_norm;
        r.assert(Assertion::above(
            format!("projection_norm_ratio_n_{}", cfg.n_max),
            "projection-norm divergence",
            ratio,
            1.0 + g * cfg.n_max as f64,
        ));
    }
    if let Some(deg) = family(r, cfg, &Params::degenerate(cfg.params.k)) {
        if let Some(rows) = attempt(r, "degenerate_projections", "projection-norm divergence", projection_norms(&deg)) {
            let dev = rows.iter().map(|p| (p.projection_norm - 1.0).abs()).fold(0.0, f64::max);
            r.assert(Assertion::below("degenerate_projection_norms_unit", "degenerate regression", dev, bounds::UNIT_NORM));
        }
    }

    let Some(pinned) = attempt(r, "pinned_probes", "non-basis evidence", pinned_probes(&fam, cfg.probe_seed)) else {
        return;
    };
    let Some(report) = attempt(r, "basis_failure", "non-basis evidence", basis_failure_report(&fam, &pinned, &n_list)) else {
        return;
    };
    let mut defects = Table::new("probe_defects", &["probe", "N", "defect"]);
    for p in &report.probes {
        for (n, d) in p.n_list.iter().zip(&p.defects) {
            defects.push(vec![p.label.clone().into(), (*n).into(), (*d).into()]);
        }
    }
    r.tables.push(defects);
    let mut proj = Table::new("projection_norms", &["n", "phi_norm", "psi_norm", "projection_norm"]);
    for p in &report.projections {
        proj.push(vec![p.n.into(), p.phi_norm.into(), p.psi_norm.into(), p.projection_norm.into()]);
    }
    r.tables.push(proj);
    let mut aligned = Table::new("aligned_probe", &["n", "single_term_norm", "projection_norm"]);
    let mut aligned_dev = 0.0_f64;
    for a in &report.aligned {
        aligned_dev = aligned_dev.max((a.single_term_norm - a.projection_norm).abs() / a.projection_norm);
        aligned.push(vec![a.n.into(), a.single_term_norm.into(), a.projection_norm.into()]);
    }
    r.tables.push(aligned);
    r.assert(Assertion::below("aligned_probe_single_term", "non-basis evidence", aligned_dev, bounds::UNIT_NORM));

    if let Some(phi5) = report.probes.iter().find(|p| p.label == "phi5") {
        let scale = fam.phi()[5].norm();
        r.assert(Assertion::below("member_expansion_terminates", "non-basis evidence", phi5.defects[5] / scale, bounds::UNIT_NORM));
    }
    if let Some(e0) = report.probes.iter().find(|p| p.label == "e0") {
        let last = e0.defects.last().copied().unwrap_or(f64::NAN);
        r.assert(Assertion::below("vacuum_expansion_converges", "non-basis evidence", last, bounds::RESOLUTION));
    }
    r.notes.push(report.summary);
}

fn growth_suite(r: &mut ExperimentReport, cfg: &ExperimentConfig) {
    let p = cfg.params;
    let dims = &cfg.growth_truncations;
    let v = NormalOrdered::intertwiner(p.alpha, p.beta);
    let Some(v_rows) = attempt(r, "intertwiner_norms", "unboundedness", truncated_norm_growth(|m| v.matrix(m), dims)) else {
        return;
    };
    let Some(t_rows) = attempt(r, "metric_norms", "unboundedness", metric_norm_growth(&p, dims)) else {
        return;
    };
    let mut table = Table::new("growth", &["M", "norm_v", "norm_theta", "norm_theta_inv"]);
    for (a, b) in v_rows.iter().zip(&t_rows) {
        table.push(vec![a.dim.into(), a.norm.into(), b.norm_theta.into(), b.norm_theta_inv.into()]);
    }
    r.tables.push(table);
    let series: [(&str, Vec<f64>); 3] = [
        ("v", v_rows.iter().map(|x| x.norm).collect()),
        ("theta", t_rows.iter().map(|x| x.norm_theta).collect()),
        ("theta_inv", t_rows.iter().map(|x| x.norm_theta_inv).collect()),
    ];
    for (name, s) in &series {
        if p.is_degenerate() {
            let dev = s.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
            r.assert(Assertion::below(format!("norm_{name}_bounded"), "unboundedness", dev, cfg.tolerance));
        } else {
            // smallest relative step; positive iff strictly increasing
            let step = s.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::INFINITY, f64::min);
            r.assert(Assertion::above(format!("norm_{name}_increasing"), "unboundedness", step, 0.0));
        }
    }

    if let Some(fam) = family(r, cfg, &p) {
        let mut norms = Table::new("family_norms", &["n", "phi_norm_sq", "psi_norm_sq"]);
        for (n, (phi, psi)) in fam.phi().iter().zip(fam.psi()).enumerate() {
            norms.push(vec![n.into(), phi.norm_squared().into(), psi.norm_squared().into()]);
        }
        r.tables.push(norms);
        if p.is_degenerate() {
            let dev = fam
                .phi()
                .iter()
                .chain(fam.psi())
                .map(|v| (v.norm_squared() - 1.0).abs())
                .fold(0.0, f64::max);
            r.assert(Assertion::below("family_norms_flat", "degenerate regression", dev, bounds::UNIT_NORM));
        }
    }
    if p.is_degenerate() {
        r.notes.push(
            "degenerate case alpha = beta: V is the unitary displacement, Theta is the identity and \
             the family norms are flat"
                .into(),
        );
    }
}

/// Parses `PBLAB_THREADS`; unset or empty means rayon's default.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("PBLAB_THREADS") {
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("PBLAB_THREADS must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `suites` on a pool of at most `threads` workers. Reports come back
/// in the order of `suites` regardless of scheduling.
pub fn run_suites(suites: &[Suite], cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ExperimentReport>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| suites.par_iter().map(|&s| run_suite(s, cfg)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub suites: Vec<(String, bool)>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|(_, ok)| *ok)
    }
}

/// Runs the suites and writes each report to `out/<suite>/`, plus a
/// `summary.csv` or `summary.json` in `out`.
pub fn run_and_emit(
    suites: &[Suite],
    cfg: &ExperimentConfig,
    out: &Path,
    format: Format,
    threads: Option<usize>,
) -> Result<(Vec<ExperimentReport>, RunSummary)> {
    let reports = run_suites(suites, cfg, threads)?;
    let mut files = Vec::new();
    for rep in &reports {
        files.extend(emit_report(rep, &out.join(&rep.suite), format)?);
    }
    let mut summary = ExperimentReport::new("summary", cfg);
    let mut table = Table::new("summary", &["suite", "passed", "assertions", "failures"]);
    for rep in &reports {
        table.push(vec![
            rep.suite.clone().into(),
            Cell::from(rep.passed()),
            rep.assertions.len().into(),
            rep.failures().count().into(),
        ]);
    }
    summary.tables.push(table);
    for rep in &reports {
        summary.assert(Assertion::holds(format!("suite_{}", rep.suite), "suite result", rep.passed()));
    }
    files.extend(emit_report(&summary, &out.join("summary"), format)?);
    let run = RunSummary {
        suites: reports.iter().map(|r| (r.suite.clone(), r.passed())).collect(),
        files,
    };
    Ok((reports, run))
}
