//! Experiment configuration, read from TOML.
//!
//! ```toml
//! k = 0.7
//! alpha = [0.3, 0.2]
//! beta = [-0.5, 0.0]
//! truncation = 128
//! n_max = 30
//! quadrature_order = 512
//! tolerance = 1e-8
//! growth_truncations = [16, 32, 64, 128]
//! probe_seed = 7
//! output_dir = "pblab-out"
//! ```
//!
//! Every key is optional and defaults to the reference value shown. When
//! `quadrature_order` is absent it follows `4 * truncation`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fock::{Params, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub params: Params,
    pub truncation: usize,
    pub n_max: usize,
    pub quadrature_order: usize,
    pub tolerance: f64,
    pub growth_truncations: Vec<usize>,
    pub probe_seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: Params::reference(),
            truncation: 128,
            n_max: 30,
            quadrature_order: 512,
            tolerance: 1e-8,
            growth_truncations: vec![16, 32, 64, 128],
            probe_seed: 7,
            output_dir: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    k: Option<f64>,
    alpha: Option<[f64; 2]>,
    beta: Option<[f64; 2]>,
    truncation: Option<usize>,
    n_max: Option<usize>,
    quadrature_order: Option<usize>,
    tolerance: Option<f64>,
    growth_truncations: Option<Vec<usize>>,
    probe_seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let d = Self::default();
        let pair = |p: Option<[f64; 2]>, fallback: C64| p.map_or(fallback, |[re, im]| C64::new(re, im));
        let truncation = raw.truncation.unwrap_or(d.truncation);
        let params = Params::new(
            raw.k.unwrap_or(d.params.k),
            pair(raw.alpha, d.params.alpha),
            pair(raw.beta, d.params.beta),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let cfg = Self {
            params,
            truncation,
            n_max: raw.n_max.unwrap_or(d.n_max),
            quadrature_order: raw.quadrature_order.unwrap_or(4 * truncation),
            tolerance: raw.tolerance.unwrap_or(d.tolerance),
            growth_truncations: raw.growth_truncations.unwrap_or(d.growth_truncations),
            probe_seed: raw.probe_seed.unwrap_or(d.probe_seed),
            output_dir: raw.output_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return fail(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.truncation < 4 {
            return fail(format!("truncation must be at least 4, got {}", self.truncation));
        }
        if 2 * self.n_max >= self.truncation {
            return fail(format!(
                "n_max = {} must be below truncation / 2 = {}",
                self.n_max,
                self.truncation / 2
            ));
        }
        if self.quadrature_order < 2 {
            return fail(format!("quadrature_order must be at least 2, got {}", self.quadrature_order));
        }
        let g = &self.growth_truncations;
        if g.is_empty() || g[0] < 2 || g.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!(
                "growth_truncations must be non-empty, strictly increasing and >= 2: {g:?}"
            ));
        }
        Ok(())
    }

    /// Flat key/value echo for report provenance.
    pub fn echo(&self) -> Vec<(&'static str, ConfigValue)> {
        use ConfigValue::*;
        let p = &self.params;
        vec![
            ("k", Float(p.k)),
            ("alpha_re", Float(p.alpha.re)),
            ("alpha_im", Float(p.alpha.im)),
            ("beta_re", Float(p.beta.re)),
            ("beta_im", Float(p.beta.im)),
            ("truncation", Int(self.truncation as u64)),
            ("n_max", Int(self.n_max as u64)),
            ("quadrature_order", Int(self.quadrature_order as u64)),
            ("tolerance", Float(self.tolerance)),
            (
                "growth_truncations",
                Text(
                    self.growth_truncations
                        .iter()
                        .map(|m| m.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
            ),
            ("probe_seed", Int(self.probe_seed)),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigValue {
    Int(u64),
    Float(f64),
    Text(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn quadrature_follows_truncation() {
        let c = ExperimentConfig::from_toml_str("truncation = 64\nn_max = 20").unwrap();
        assert_eq!(c.quadrature_order, 256);
    }

    #[test]
    fn complex_pairs() {
        let c = ExperimentConfig::from_toml_str("alpha = [0.7, 0.0]\nbeta = [0.7, 0.0]").unwrap();
        assert!(c.params.is_degenerate());
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            "tolerance = 0.0",
            "tolerance = -1e-3",
            "n_max = 64",
            "growth_truncations = [16, 16]",
            "growth_truncations = []",
            "alpha = [1.0]",
            "unknown = 3",
            "k = \"x\"",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml_str(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }
}
