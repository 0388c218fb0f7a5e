//! Numerical laboratory for pseudo-bosons built from shifted harmonic
//! oscillator ladders: truncated Fock-space operators, Hermite-function
//! coordinates, the biorthogonal families `φ_n`, `Ψ_n`, the metric operator
//! and the evidence that the families are complete but not bases.

pub mod config;
pub mod error;
pub mod experiment;
pub mod families;
pub mod fock;
pub mod hermite;
pub mod metric;
mod precise;
pub mod quasi_basis;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiment::{run_suite, Suite};
pub use fock::{FockVector, OperatorMatrix, Params, C64};
pub use report::{ExperimentReport, Format};
