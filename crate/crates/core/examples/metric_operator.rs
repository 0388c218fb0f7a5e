//! The metric operator `Θ` that maps `φ_n` to `Ψ_n`, its conjugacy and
//! positivity properties, and the similarity of `N` to the number operator.
//!
//! Run with `cargo run --release --example metric_operator`.

use pblab::families::build_family_pair;
use pblab::fock::seeded_vectors;
use pblab::metric::{build_theta, conjugacy_check, number_spectrum, positivity_check, similarity_check};
use pblab::{FockVector, Params, Result};

fn main() -> Result<()> {
    let p = Params::reference();
    let dim = 128;
    let theta = build_theta(&p, dim)?;
    let fam = build_family_pair(&p, 30, dim, 1e-12)?;

    println!("max |Theta phi_n - Psi_n| / |Psi_n|: {:.3e}", theta.intertwining_residual(&fam));
    println!("<phi0, Theta phi0> = {:.12}", theta.expectation(&fam.phi()[0]));
    println!("Hermiticity defect {:.1e}, Theta Theta^-1 - 1 = {:.1e}", theta.hermiticity_defect(), theta.inverse_defect());

    let low: Vec<FockVector> = (0..=10).map(|n| FockVector::basis(n, dim)).collect::<Result<_>>()?;
    let c = conjugacy_check(&theta, &low)?;
    println!("Theta^-1 B† Theta - A on e0..e10: {:.3e}", c.pair);

    let vectors = seeded_vectors(7, 5, 11, dim)?;
    println!("\n<f, Theta f> for seeded random vectors:");
    for row in positivity_check(&theta, &fam, &vectors, 1e-8)? {
        println!("  direct {:.10}  factored {:.10}  via Psi_n {:.10}", row.direct, row.factored, row.expansion);
    }

    let s = similarity_check(&p, dim)?;
    println!("\nresiduals on the leading {} modes:", s.block);
    println!("  V^-1 N V - n0           {:.2e}", s.intertwiner_number);
    println!("  V'^-1 N† V' - n0        {:.2e}", s.intertwiner_number_adjoint);
    println!("  T^-1 N T - N†           {:.2e}", s.similarity);

    let eig = number_spectrum(&p, dim, 6)?;
    let shown: Vec<String> = eig.iter().map(|z| format!("{:.9}", z.re)).collect();
    println!("lowest eigenvalues of N: {}", shown.join(", "));
    Ok(())
}
