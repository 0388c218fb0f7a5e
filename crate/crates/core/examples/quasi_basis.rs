//! Weak resolution of the identity and why `{φ_n}` is still not a basis.
//!
//! Run with `cargo run --release --example quasi_basis`.

use pblab::families::build_family_pair;
use pblab::quasi_basis::{basis_failure_report, pinned_probes, resolution_partial_sums, Ordering, Probe};
use pblab::{Params, Result};

fn main() -> Result<()> {
    let fam = build_family_pair(&Params::reference(), 30, 128, 1e-12)?;
    let n_list: Vec<usize> = (0..=30).collect();

    let f = Probe::basis(2, 128)?;
    let g = Probe::basis(3, 128)?;
    let rep = resolution_partial_sums(&fam, &f, &g, &n_list)?;
    println!("sum_n <e2,phi_n><Psi_n,e3> against <e2,e3> = 0:");
    for n in [0, 3, 6, 10, 15, 20, 30] {
        println!("  N = {n:2}: defect {:.3e}", rep.phi_psi_defects[n]);
    }
    println!("converged below 1e-6 at N = {:?}", rep.converged_at(Ordering::PhiPsi, 1e-6));

    let probes = pinned_probes(&fam, 7)?;
    let report = basis_failure_report(&fam, &probes, &n_list)?;
    println!("\nexpansion defect |sum_{{n<=N}} <Psi_n,f> phi_n - f| at N = 5, 15, 30:");
    for p in &report.probes {
        println!("  {:<14} {:.2e}  {:.2e}  {:.2e}", p.label, p.defects[5], p.defects[15], p.defects[30]);
    }
    println!("\n|P_n| = |phi_n| |Psi_n|:");
    for row in report.projections.iter().step_by(6) {
        println!("  n = {:2}: {:.6e}", row.n, row.projection_norm);
    }
    println!("\n{}", report.summary);
    Ok(())
}
