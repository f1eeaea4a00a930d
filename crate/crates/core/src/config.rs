//! Run configuration: one JSON document covering every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::generate::{SamplerConfig, SuiteConfig};
use crate::grammar::{GrammarConfig, GrammarConfigError};
use crate::splits::{AssignError, SplitConfig};

pub const SEED_ENV: &str = "GRIDFORGE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; all available cores when unset.
    pub jobs: Option<usize>,
    pub out: PathBuf,
    #[serde(deserialize_with = "compositional_suite")]
    pub compositional: SuiteConfig,
    #[serde(deserialize_with = "length_suite")]
    pub length: SuiteConfig,
    pub sampler: SamplerConfig,
    pub splits: SplitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            jobs: None,
            out: PathBuf::from("out"),
            compositional: SuiteConfig::compositional(),
            length: SuiteConfig::length(),
            sampler: SamplerConfig::default(),
            splits: SplitConfig::default(),
        }
    }
}

/// A suite section where omitted keys fall back to that suite's own defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuitePatch {
    grid_size: Option<usize>,
    samples_per_slot: Option<usize>,
    grammar: Option<GrammarConfig>,
}

impl SuitePatch {
    fn over(self, base: SuiteConfig) -> SuiteConfig {
        SuiteConfig {
            grid_size: self.grid_size.unwrap_or(base.grid_size),
            samples_per_slot: self.samples_per_slot.unwrap_or(base.samples_per_slot),
            grammar: self.grammar.unwrap_or(base.grammar),
        }
    }
}

fn compositional_suite<'de, D: Deserializer<'de>>(d: D) -> Result<SuiteConfig, D::Error> {
    Ok(SuitePatch::deserialize(d)?.over(SuiteConfig::compositional()))
}

fn length_suite<'de, D: Deserializer<'de>>(d: D) -> Result<SuiteConfig, D::Error> {
    Ok(SuitePatch::deserialize(d)?.over(SuiteConfig::length()))
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{suite} grammar: {source}")]
    Grammar { suite: &'static str, source: GrammarConfigError },
    #[error("{suite} grid size {size} is below 3")]
    GridSize { suite: &'static str, size: usize },
    #[error("{suite} samples_per_slot must be at least 1")]
    Samples { suite: &'static str },
    #[error("jobs must be at least 1")]
    Jobs,
    #[error(transparent)]
    Splits(#[from] AssignError),
    #[error("{SEED_ENV}={value:?} is not an unsigned integer")]
    SeedEnv { value: String },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.display().to_string(), source })
    }

    /// Applies the seed environment override, if set.
    pub fn apply_env(&mut self, value: Option<String>) -> Result<(), ConfigError> {
        if let Some(value) = value {
            self.seed = value.trim().parse().map_err(|_| ConfigError::SeedEnv { value })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (suite, s) in [("compositional", &self.compositional), ("length", &self.length)] {
            s.grammar.validate().map_err(|source| ConfigError::Grammar { suite, source })?;
            if s.grid_size < 3 {
                return Err(ConfigError::GridSize { suite, size: s.grid_size });
            }
            if s.samples_per_slot == 0 {
                return Err(ConfigError::Samples { suite });
            }
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::Jobs);
        }
        self.splits.validate()?;
        Ok(())
    }
}
