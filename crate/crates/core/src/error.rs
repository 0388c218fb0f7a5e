use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation must be at least 2, got {0}")]
    Dimension(usize),

    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),

    #[error("n_max = {n_max} violates the interior guard n_max < M/2 at M = {dim}")]
    InteriorGuard { n_max: usize, dim: usize },

    #[error(
        "truncation M = {dim} too small at index {index}: tail bound {tail:e} exceeds tolerance {tolerance:e}"
    )]
    TruncationTooSmall {
        index: usize,
        dim: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("truncation list must be strictly increasing with every entry >= 2: {0:?}")]
    TruncationList(Vec<usize>),

    #[error("numerical failure at M = {dim}: {what}")]
    Numerical { dim: usize, what: String },

    #[error("Hermite function e_{n} overflows at x = {x}")]
    Range { n: usize, x: Complex64 },

    #[error("cross-validation of {what} failed: deviation {deviation:e} > {tolerance:e}")]
    CrossCheck {
        what: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
