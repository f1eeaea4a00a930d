//! Canonical dataset files, statistics and integrity verification.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::de::IgnoredAny;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grammar::{parse, GrammarConfig};
use crate::sampler::{has_size_contrast, validate_world};
use crate::splits::{Example, SplitConfig, SplitLabel, SplitName};
use crate::world::{check_sequence, SequenceFault};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Compositional,
    Length,
}

impl SuiteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Compositional => "compositional",
            SuiteKind::Length => "length",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format_version: u32,
    pub suite: SuiteKind,
    pub grid_size: usize,
    pub samples_per_slot: usize,
    pub grammar: GrammarConfig,
    pub grammar_config_hash: String,
    pub master_seed: u64,
    pub split_config: SplitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub splits: BTreeMap<SplitLabel, Vec<Example>>,
}

impl Dataset {
    pub fn examples(&self) -> impl Iterator<Item = &Example> {
        self.splits.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.splits.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn find(&self, id: u64) -> Option<&Example> {
        self.examples().find(|e| e.id == id)
    }
}

/// SHA-256 of the grammar config's canonical JSON.
pub fn grammar_config_hash(config: &GrammarConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    hex::encode(Sha256::digest(value.to_string()))
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("malformed dataset at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
}

impl From<serde_json::Error> for DatasetError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            let message = e.to_string();
            return DatasetError::Io { path: String::new(), source: io::Error::other(message) };
        }
        DatasetError::Malformed { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn canonical<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value).expect("value serializes").to_string()
}

/// Writes canonical JSON: keys sorted, examples sorted by id, one example per line.
pub fn write_dataset_to<W: Write>(ds: &Dataset, mut out: W) -> io::Result<()> {
    write!(out, "{{\"header\":{},\"splits\":{{", canonical(&ds.header))?;
    let mut labels: Vec<&SplitLabel> = ds.splits.keys().collect();
    labels.sort_by_key(|l| l.as_str());
    for (i, label) in labels.into_iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        write!(out, "\"{}\":[", label.as_str())?;
        let mut examples: Vec<&Example> = ds.splits[label].iter().collect();
        examples.sort_by_key(|e| e.id);
        for (j, e) in examples.into_iter().enumerate() {
            out.write_all(if j > 0 { b",\n" } else { b"\n" })?;
            out.write_all(canonical(e).as_bytes())?;
        }
        out.write_all(b"\n]")?;
    }
    out.write_all(b"}}\n")?;
    out.flush()
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let io_err = |source| DatasetError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    write_dataset_to(ds, BufWriter::new(file)).map_err(io_err)
}

pub fn dataset_bytes(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    write_dataset_to(ds, &mut out).expect("writing to memory");
    out
}

#[derive(Deserialize)]
struct VersionProbe {
    header: HeaderProbe,
    #[serde(rename = "splits")]
    _splits: IgnoredAny,
}

#[derive(Deserialize)]
struct HeaderProbe {
    format_version: u32,
}

pub fn read_dataset_from_slice(bytes: &[u8]) -> Result<Dataset, DatasetError> {
    let probe: VersionProbe = serde_json::from_slice(bytes)?;
    if probe.header.format_version != FORMAT_VERSION {
        return Err(DatasetError::VersionMismatch { found: probe.header.format_version, expected: FORMAT_VERSION });
    }
    Ok(serde_json::from_slice(bytes)?)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let io_err = |source| DatasetError::Io { path: path.display().to_string(), source };
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(io_err)?).read_to_end(&mut bytes).map_err(io_err)?;
    read_dataset_from_slice(&bytes)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCounts {
    /// Examples whose target has this color and shape.
    pub placed: usize,
    /// Of those, examples whose command names the color.
    pub referred: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub examples: usize,
    /// Distinct (command, gold sequences, target cell) triples.
    pub unique: usize,
    pub commands: usize,
    pub mean_worlds_per_command: f64,
    pub min_worlds_per_command: usize,
    /// Keyed by "color shape", e.g. "red square".
    pub targets: BTreeMap<String, TargetCounts>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub suite: Option<SuiteKind>,
    pub total: SplitStats,
    pub splits: BTreeMap<SplitLabel, SplitStats>,
}

pub fn split_stats<'a>(examples: impl IntoIterator<Item = &'a Example>) -> SplitStats {
    let mut stats = SplitStats::default();
    let mut unique = HashSet::new();
    let mut worlds: HashMap<&[String], HashSet<[u8; 32]>> = HashMap::new();
    for e in examples {
        stats.examples += 1;
        let key = serde_json::to_vec(&(&e.command, &e.gold, &e.world.target_cell)).expect("serializes");
        unique.insert(<[u8; 32]>::from(Sha256::digest(key)));
        let world = serde_json::to_vec(&e.world).expect("serializes");
        worlds.entry(e.command.tokens()).or_default().insert(Sha256::digest(world).into());
        let t = e.meta.target;
        let counts = stats.targets.entry(format!("{} {}", t.color, t.shape)).or_default();
        counts.placed += 1;
        if e.frame.color.is_some() {
            counts.referred += 1;
        }
    }
    stats.unique = unique.len();
    stats.commands = worlds.len();
    if !worlds.is_empty() {
        let total: usize = worlds.values().map(HashSet::len).sum();
        stats.mean_worlds_per_command = total as f64 / worlds.len() as f64;
        stats.min_worlds_per_command = worlds.values().map(HashSet::len).min().unwrap_or(0);
    }
    stats
}

pub fn dataset_stats(ds: &Dataset) -> StatsReport {
    StatsReport {
        suite: Some(ds.header.suite),
        total: split_stats(ds.examples()),
        splits: ds.splits.iter().map(|(l, ex)| (*l, split_stats(ex))).collect(),
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22} {:>9} {:>9} {:>9} {:>12}", "split", "examples", "unique", "commands", "per command")?;
        let rows = self.splits.iter().map(|(l, s)| (l.as_str(), s)).chain([("total", &self.total)]);
        for (name, s) in rows {
            writeln!(
                f,
                "{:<22} {:>9} {:>9} {:>9} {:>12.1}",
                name, s.examples, s.unique, s.commands, s.mean_worlds_per_command
            )?;
        }
        writeln!(f)?;
        writeln!(f, "{:<22} {:<16} {:>9} {:>9}", "split", "target", "placed", "referred")?;
        for (label, s) in &self.splits {
            for (target, c) in &s.targets {
                writeln!(f, "{:<22} {:<16} {:>9} {:>9}", label.as_str(), target, c.placed, c.referred)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateId,
    SplitLabel,
    Parse,
    World,
    SizeContrast,
    Metadata,
    Execution,
    Goal,
    Manner,
    Leakage,
    Unsound,
    UnseenCommand,
    Kshot,
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub id: Option<u64>,
    pub split: Option<SplitLabel>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = serde_json::to_value(self.kind).expect("serializes");
        write!(f, "[{}]", kind.as_str().unwrap_or("?"))?;
        if let Some(split) = self.split {
            write!(f, " {split}")?;
        }
        if let Some(id) = self.id {
            write!(f, " #{id}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub examples_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

fn violation(e: &Example, split: SplitLabel, kind: ViolationKind, detail: impl Into<String>) -> Violation {
    Violation { id: Some(e.id), split: Some(split), kind, detail: detail.into() }
}

/// Checks one example in isolation: grammar, world, metadata and every gold sequence.
pub fn verify_example(e: &Example, split: SplitLabel) -> Vec<Violation> {
    let mut out = Vec::new();
    if e.meta.split != split {
        out.push(violation(e, split, ViolationKind::SplitLabel, format!("labeled {}", e.meta.split)));
    }
    match parse(&e.command) {
        Ok(frame) if frame == e.frame => {}
        Ok(_) => out.push(violation(e, split, ViolationKind::Parse, "frame differs from parsed command")),
        Err(err) => out.push(violation(e, split, ViolationKind::Parse, err.to_string())),
    }
    if !validate_world(&e.frame, &e.world) {
        out.push(violation(e, split, ViolationKind::World, "referent does not resolve uniquely to the target"));
        return out;
    }
    if !has_size_contrast(&e.frame, &e.world) {
        out.push(violation(e, split, ViolationKind::SizeContrast, "no contrasting distractor for the size word"));
    }
    let (dr, dc) = e.world.agent.cell().offset_to(e.world.target_cell);
    let meta_ok = e.meta.target_cell == e.world.target_cell
        && e.world.target() == Some(&e.meta.target)
        && e.meta.distance == dr.unsigned_abs() + dc.unsigned_abs()
        && crate::sampler::RelativeDirection::from_offset(dr, dc) == Some(e.meta.direction)
        && e.gold.first().map(|g| g.len()) == Some(e.meta.gold_length)
        && e.meta.referred_target == crate::grammar::referred_target(&e.command);
    if !meta_ok {
        out.push(violation(e, split, ViolationKind::Metadata, "metadata inconsistent with world or gold"));
    }
    for (i, gold) in e.gold.iter().enumerate() {
        let Err(fault) = check_sequence(&e.frame, &e.world, gold) else { continue };
        let kind = match fault {
            SequenceFault::Execution(_) => ViolationKind::Execution,
            SequenceFault::Goal => ViolationKind::Goal,
            SequenceFault::Manner => ViolationKind::Manner,
            SequenceFault::Resolve(_) => ViolationKind::World,
        };
        out.push(violation(e, split, kind, format!("gold {i}: {fault}")));
    }
    out
}

/// Re-runs every per-example check and the split-level invariants.
pub fn verify_dataset(ds: &Dataset) -> VerifyReport {
    let cfg = &ds.header.split_config;
    let items: Vec<(SplitLabel, &Example)> =
        ds.splits.iter().flat_map(|(l, ex)| ex.iter().map(move |e| (*l, e))).collect();
    let mut violations: Vec<Violation> =
        items.par_iter().flat_map_iter(|(l, e)| verify_example(e, *l)).collect();

    let mut ids = HashSet::new();
    for (l, e) in &items {
        if !ids.insert(e.id) {
            violations.push(violation(e, *l, ViolationKind::DuplicateId, "id used more than once"));
        }
    }

    let enabled: Vec<SplitName> = match ds.header.suite {
        SuiteKind::Compositional => {
            SplitName::COMPOSITIONAL.into_iter().filter(|n| cfg.is_enabled(*n)).collect()
        }
        SuiteKind::Length => vec![SplitName::Length],
    };
    let ranked: Vec<SplitName> = match ds.header.suite {
        SuiteKind::Compositional => cfg.priority.iter().copied().filter(|n| enabled.contains(n)).collect(),
        SuiteKind::Length => enabled.clone(),
    };
    let matching = |e: &Example| -> Vec<SplitName> {
        ranked.iter().copied().filter(|n| n.matches(e, cfg.length_threshold) == Some(true)).collect()
    };

    let train = ds.splits.get(&SplitLabel::Train).map(Vec::as_slice).unwrap_or(&[]);
    let mut shots = 0;
    for e in train {
        let hits = matching(e);
        if e.meta.kshot {
            if hits.first() == Some(&SplitName::AdverbKshot) {
                shots += 1;
                continue;
            }
            violations.push(violation(e, SplitLabel::Train, ViolationKind::Kshot, "few-shot flag on a non-held-out example"));
        }
        if let Some(name) = hits.first() {
            violations.push(violation(e, SplitLabel::Train, ViolationKind::Leakage, format!("matches split {name}")));
        }
    }
    if shots > cfg.kshot {
        violations.push(Violation {
            id: None,
            split: Some(SplitLabel::Train),
            kind: ViolationKind::Kshot,
            detail: format!("{shots} few-shot examples in train, configured {}", cfg.kshot),
        });
    }
    let train_max = train.iter().map(|e| e.meta.gold_length).max().unwrap_or(0);
    let train_commands: HashSet<&[String]> = train.iter().map(|e| e.command.tokens()).collect();

    for (label, examples) in &ds.splits {
        let expected = label.split_name();
        for e in examples {
            match *label {
                SplitLabel::Train => {}
                SplitLabel::Dev | SplitLabel::TestRandom => {
                    if let Some(name) = matching(e).first() {
                        violations.push(violation(e, *label, ViolationKind::Leakage, format!("matches split {name}")));
                    }
                    if !train_commands.contains(e.command.tokens()) {
                        violations.push(violation(e, *label, ViolationKind::UnseenCommand, "command absent from train"));
                    }
                }
                _ => {
                    let hits = matching(e);
                    if hits.first().copied() != expected {
                        let detail = match hits.first() {
                            None => "matches no held-out predicate".to_string(),
                            Some(n) => format!("first matching split is {n}"),
                        };
                        violations.push(violation(e, *label, ViolationKind::Unsound, detail));
                    }
                    if *label == SplitLabel::TestAdverbKshot && e.meta.gold_length > train_max {
                        violations.push(violation(e, *label, ViolationKind::Unsound, "longer than every train sequence"));
                    }
                }
            }
        }
    }

    let train_hashes: HashSet<String> = train.par_iter().map(Example::content_hash).collect();
    for (label, examples) in ds.splits.iter().filter(|(l, _)| l.is_test()) {
        let overlaps: Vec<Violation> = examples
            .par_iter()
            .filter(|e| train_hashes.contains(&e.content_hash()))
            .map(|e| violation(e, *label, ViolationKind::Overlap, "same command and world as a train example"))
            .collect();
        violations.extend(overlaps);
    }

    violations.sort_by_key(|v| (v.id, v.kind));
    VerifyReport { examples_checked: items.len(), violations }
}
