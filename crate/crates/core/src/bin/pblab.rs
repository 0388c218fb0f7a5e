//! `pblab run <suite|all> [--config <path>] [--out <dir>] [--format csv|json]`
//!
//! Exit status: 0 when every assertion passes, 1 when one fails, 2 for
//! configuration or usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pblab::experiment::{run_and_emit, threads_from_env, Suite};
use pblab::{Error, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "pblab", version, about = "Pseudo-boson numerical experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, or `all`.
    Run {
        /// family, ladder, norms, metric, similarity, quasi-basis, growth or all
        suite: String,
        /// TOML configuration; defaults to the reference parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides `output_dir` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

const USAGE_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Command::Run { suite, config, out, format } = cli.command;
    match run(&suite, config, out, format) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("pblab: {e}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn run(suite: &str, config: Option<PathBuf>, out: Option<PathBuf>, format: OutputFormat) -> Result<bool, Error> {
    let suites = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse::<Suite>()?]
    };
    let cfg = match &config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    let out = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("pblab-out"));
    let format = match format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    let (reports, summary) = run_and_emit(&suites, &cfg, &out, format, threads_from_env()?)?;
    for rep in &reports {
        let status = if rep.passed() { "PASS" } else { "FAIL" };
        println!("{status} {}", rep.suite);
        for a in rep.failures() {
            println!(
                "  failed {}: {:e} {} {:e} ({})",
                a.name,
                a.measured,
                a.relation.symbol(),
                a.bound,
                a.property
            );
        }
        for note in rep.notes.iter().filter(|n| n.contains(": ")) {
            if rep.failures().any(|a| note.starts_with(&format!("{}:", a.name))) {
                println!("  {note}");
            }
        }
    }
    println!("wrote {} files under {}", summary.files.len(), out.display());
    Ok(summary.passed())
}
