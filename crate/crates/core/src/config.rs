//! Pipeline configuration, read from a TOML file.
//!
//! ```toml
//! ngram_order = 3
//! alpha = 1.0
//! theta_content = 1.0
//! rouge_beta = 1.2
//! seed = 0
//!
//! [weights]
//! morph = 1.0
//! qword = 1.0
//!
//! [filters]
//! min_question_tokens = true
//! degenerate_answer = true
//! answer_in_question = true
//! dedup = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::induce::DEFAULT_THETA_CONTENT;
use crate::metrics::ROUGE_BETA;
use crate::rank::{FilterToggles, Weights};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub ngram_order: usize,
    pub alpha: f64,
    pub weights: Weights,
    pub theta_content: f64,
    pub filters: FilterToggles,
    pub rouge_beta: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            ngram_order: 3,
            alpha: 1.0,
            weights: Weights::default(),
            theta_content: DEFAULT_THETA_CONTENT,
            filters: FilterToggles::default(),
            rouge_beta: ROUGE_BETA,
            seed: 0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Loads `path` if given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Config::default()), Self::load)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.ngram_order < 2 {
            return Err(ConfigError::Invalid("ngram_order must be >= 2".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(ConfigError::Invalid("alpha must be > 0".into()));
        }
        if self.theta_content < 0.0 {
            return Err(ConfigError::Invalid("theta_content must be >= 0".into()));
        }
        let w = self.weights;
        if w.morph < 0.0 || w.qword < 0.0 || (w.morph == 0.0 && w.qword == 0.0) {
            return Err(ConfigError::Invalid("weights must be non-negative and not both zero".into()));
        }
        if !(self.rouge_beta > 0.0) {
            return Err(ConfigError::Invalid("rouge_beta must be > 0".into()));
        }
        Ok(())
    }
}
