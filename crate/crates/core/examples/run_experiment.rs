//! Running a suite from a TOML configuration and writing its report, the
//! same path the `pblab` binary takes.
//!
//! Run with `cargo run --release --example run_experiment`.

use pblab::experiment::{run_and_emit, Suite};
use pblab::{ExperimentConfig, Format, Result};

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        alpha = [0.3, 0.2]
        beta = [-0.5, 0.0]
        truncation = 96
        n_max = 20
        growth_truncations = [12, 24, 48, 96]
        "#,
    )?;
    let out = std::env::temp_dir().join("pblab-example");
    let (reports, summary) = run_and_emit(&[Suite::Norms, Suite::Growth], &cfg, &out, Format::Csv, Some(2))?;
    for rep in &reports {
        println!("{}: {} assertions, passed = {}", rep.suite, rep.assertions.len(), rep.passed());
        for a in &rep.assertions {
            println!("  {:<28} {:.3e} {} {:.1e}", a.name, a.measured, a.relation.symbol(), a.bound);
        }
    }
    println!("\nfiles:");
    for f in &summary.files {
        println!("  {}", f.display());
    }
    Ok(())
}
