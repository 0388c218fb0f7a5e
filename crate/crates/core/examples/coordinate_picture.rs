//! Hermite functions, Gauss–Hermite quadrature and the translation identity
//! `D(k) e_n (x) = e_n(x + √2 k)`.
//!
//! Run with `cargo run --release --example coordinate_picture`.

use pblab::families::shifted_family;
use pblab::hermite::{gauss_hermite, hermite_function, synthesize, vacuum_phi0, vacuum_psi0};
use pblab::{Params, Result, C64};

fn main() -> Result<()> {
    for x in [0.0, 1.0, 3.0] {
        println!("e_3({x}) = {:+.12}", hermite_function(3, C64::from(x))?.re);
    }

    let grid = gauss_hermite(512)?;
    let total: f64 = grid.weights().iter().sum();
    println!("\n512-point rule: sum of weights = {total:.15} (sqrt(pi) = {:.15})", std::f64::consts::PI.sqrt());
    println!("outermost node {:.6}", grid.nodes()[grid.order() - 1]);

    let k = 0.7;
    let family = shifted_family(k, 10, 128, 1e-12)?;
    let shift = std::f64::consts::SQRT_2 * k;
    println!("\nmax |D(k)e_n(x) - e_n(x + sqrt2 k)| over the nodes, k = {k}:");
    for (n, v) in family.iter().enumerate().step_by(2) {
        let samples = synthesize(v, &grid)?;
        let mut worst = 0.0_f64;
        for (x, s) in grid.nodes().iter().zip(&samples) {
            worst = worst.max((s - hermite_function(n, C64::from(x + shift))?).norm());
        }
        println!("  n = {n:2}: {worst:.3e}");
    }

    let p = Params::reference();
    let phi0 = vacuum_phi0(&p);
    let psi0 = vacuum_psi0(&p);
    let pairing = grid.inner(&phi0.sample(&grid), &psi0.sample(&grid));
    println!("\n<phi0, Psi0> by quadrature = {pairing:.12}");
    let proj = phi0.project(&grid, 128)?;
    println!("phi0 projected on 128 modes: norm {:.12}, quadrature tail {:.1e}", proj.norm(), proj.tail_bound());
    Ok(())
}
