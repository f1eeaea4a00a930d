//! End-to-end dataset construction from a run configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::RunConfig;
use crate::dataset_io::{dataset_bytes, grammar_config_hash, Dataset, DatasetHeader, SuiteKind, FORMAT_VERSION};
use crate::generate::{generate_pool, GenerateError, SuiteConfig};
use crate::seed::derive_seed;
use crate::splits::{assign_all, build_length_split, AssignError, AssignmentLog, SplitLabel, SplitName};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Assign(#[from] AssignError),
}

pub struct BuiltSuite {
    pub dataset: Dataset,
    pub log: AssignmentLog,
}

pub fn suite_seed(master: u64, kind: SuiteKind) -> u64 {
    derive_seed(master, &[kind as u64])
}

fn header(cfg: &RunConfig, kind: SuiteKind, suite: &SuiteConfig) -> DatasetHeader {
    DatasetHeader {
        format_version: FORMAT_VERSION,
        suite: kind,
        grid_size: suite.grid_size,
        samples_per_slot: suite.samples_per_slot,
        grammar: suite.grammar.clone(),
        grammar_config_hash: grammar_config_hash(&suite.grammar),
        master_seed: cfg.seed,
        split_config: cfg.splits.clone(),
    }
}

pub fn build_suite(cfg: &RunConfig, kind: SuiteKind) -> Result<BuiltSuite, PipelineError> {
    let suite = match kind {
        SuiteKind::Compositional => &cfg.compositional,
        SuiteKind::Length => &cfg.length,
    };
    let seed = suite_seed(cfg.seed, kind);
    let pool = generate_pool(suite, &cfg.sampler, seed, cfg.jobs)?;
    let assignment = match kind {
        SuiteKind::Compositional => assign_all(pool, &cfg.splits, seed)?,
        SuiteKind::Length => build_length_split(pool, &cfg.splits, seed)?,
    };
    Ok(BuiltSuite {
        dataset: Dataset { header: header(cfg, kind, suite), splits: assignment.splits },
        log: assignment.log,
    })
}

/// Suites the split configuration asks for: the length suite only when its split is enabled.
pub fn enabled_suites(cfg: &RunConfig) -> Vec<SuiteKind> {
    let mut kinds = vec![SuiteKind::Compositional];
    if cfg.splits.is_enabled(SplitName::Length) {
        kinds.push(SuiteKind::Length);
    }
    kinds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
    pub examples: usize,
    pub splits: BTreeMap<SplitLabel, usize>,
    pub log: AssignmentLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub config_hash: String,
    pub suites: BTreeMap<String, FileEntry>,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let mut value = serde_json::to_value(cfg).expect("config serializes");
    // Parallelism and output location never affect the data.
    if let Some(map) = value.as_object_mut() {
        map.remove("jobs");
        map.remove("out");
    }
    hex::encode(Sha256::digest(value.to_string()))
}

/// Serialized bytes plus the manifest entry for one built suite.
pub fn encode_suite(built: &BuiltSuite) -> (Vec<u8>, FileEntry) {
    let bytes = dataset_bytes(&built.dataset);
    let entry = FileEntry {
        file: format!("{}.json", built.dataset.header.suite.as_str()),
        sha256: hex::encode(Sha256::digest(&bytes)),
        examples: built.dataset.len(),
        splits: built.dataset.splits.iter().map(|(l, e)| (*l, e.len())).collect(),
        log: built.log.clone(),
    };
    (bytes, entry)
}
