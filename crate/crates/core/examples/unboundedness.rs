//! Truncated spectral norms of `V(α,β)`, `Θ` and `Θ⁻¹` as the truncation
//! grows: unbounded operators show up as norms that keep increasing.
//!
//! Run with `cargo run --release --example unboundedness`.

use pblab::fock::{truncated_norm_growth, NormalOrdered};
use pblab::metric::metric_norm_growth;
use pblab::{Params, Result};

fn main() -> Result<()> {
    let dims = [16, 32, 64, 128];
    for (label, p) in [("alpha != beta", Params::reference()), ("alpha = beta", Params::degenerate(0.7))] {
        let v = NormalOrdered::intertwiner(p.alpha, p.beta);
        let v_rows = truncated_norm_growth(|m| v.matrix(m), &dims)?;
        let t_rows = metric_norm_growth(&p, &dims)?;
        println!("{label}:");
        println!("    M      |V|            |Theta|        |Theta^-1|");
        for (a, b) in v_rows.iter().zip(&t_rows) {
            println!("  {:4}   {:<13.6e}  {:<13.6e}  {:.6e}", a.dim, a.norm, b.norm_theta, b.norm_theta_inv);
        }
    }
    Ok(())
}
