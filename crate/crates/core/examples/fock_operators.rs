//! Ladder operators on a truncated Fock space.
//!
//! Run with `cargo run --release --example fock_operators`.

use pblab::fock::{
    annihilator, commutator_defect, creation, displacement, exp_raising, FockVector, NormalOrdered,
    OperatorMatrix,
};
use pblab::{Result, C64};

fn main() -> Result<()> {
    let dim = 6;
    let a = annihilator(dim)?;
    let ad = creation(dim)?;
    println!("a on M = {dim}:\n{}", a.entries().map(|z| z.re));

    // [a, a†] = 1 everywhere except the last diagonal entry
    let c = commutator_defect(dim)?;
    println!("[a,a†] - 1 vanishes on the leading {} modes", c.interior_dim);
    println!("its last diagonal entry is {}", c.defect.entries()[(dim - 1, dim - 1)].re);

    let e2 = FockVector::basis(2, dim)?;
    let up = ad.apply(e2.coeffs());
    println!("a† e2 = {:.6} e3", up[3].re);

    // exp(δ a†) keeps the exact principal block and bounds the lost mass
    let delta = C64::new(0.8, 0.2);
    let raising = exp_raising(delta, 32)?;
    println!("\nexp(δ a†), δ = {delta}, M = 32, discarded mass per column:");
    for n in [0, 4, 8, 12, 16] {
        println!("  column {n:2}: {:.3e}", raising.tail_bounds[n]);
    }

    // D(z) is unitary; its truncation is unitary up to edge effects
    let z = C64::new(0.7, 0.0);
    let d = displacement(z, 64)?;
    let dd = &d.adjoint() * &d;
    let id = OperatorMatrix::identity(64)?;
    println!("\nD({z})† D({z}) - 1 on the leading 32 modes: {:.3e}", dd.max_deviation_on_block(&id, 32));

    let inv = NormalOrdered::displacement(z).inverse_matrix(64)?;
    println!("exact factor inverse, D D^-1 - 1 on the same block: {:.3e}", (&d * &inv).max_deviation_on_block(&id, 32));
    Ok(())
}
