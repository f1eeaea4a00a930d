//! Scoring of prediction files against a dataset.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset_io::Dataset;
use crate::grammar::SemanticFrame;
use crate::splits::{Example, SplitLabel};
use crate::world::{check_sequence, execute, Action, ActionSequence, WorldState};

pub fn exact_match(pred: &ActionSequence, golds: &[ActionSequence]) -> bool {
    golds.iter().any(|g| g == pred)
}

/// Executes without error and satisfies both goal and manner.
pub fn semantic_match(pred: &ActionSequence, frame: &SemanticFrame, world: &WorldState) -> bool {
    check_sequence(frame, world, pred).is_ok()
}

/// Success probability of picking one object uniformly and handling it correctly.
pub fn chance_level(world: &WorldState) -> f64 {
    match world.objects.len() {
        0 => 0.0,
        n => 1.0 / n as f64,
    }
}

/// Whether the agent ends in the target's row or column. A failing sequence
/// is judged by the state after its last valid token.
pub fn row_col_analysis(pred: &ActionSequence, world: &WorldState) -> bool {
    let agent = match execute(world, pred) {
        Ok(exec) => exec.final_state.agent,
        Err(err) => err.last_valid.agent,
    };
    agent.row == world.target_cell.row || agent.col == world.target_cell.col
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub id: u64,
    pub actions: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredictionError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown action token `{token}`")]
    UnknownToken { line: usize, token: String },
    #[error("line {line}: duplicate prediction for id {id}")]
    DuplicateId { line: usize, id: u64 },
    #[error("prediction for id {0} matches no example")]
    UnknownId(u64),
    #[error("reading predictions: {0}")]
    Io(String),
}

/// Parses JSON-lines predictions; blank lines are skipped.
pub fn read_predictions<R: BufRead>(reader: R) -> Result<BTreeMap<u64, ActionSequence>, PredictionError> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| PredictionError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(&line)
            .map_err(|e| PredictionError::Malformed { line: line_no, message: e.to_string() })?;
        let actions = record
            .actions
            .iter()
            .map(|t| t.parse::<Action>().map_err(|_| PredictionError::UnknownToken { line: line_no, token: t.clone() }))
            .collect::<Result<ActionSequence, _>>()?;
        if out.insert(record.id, actions).is_some() {
            return Err(PredictionError::DuplicateId { line: line_no, id: record.id });
        }
    }
    Ok(out)
}

pub fn write_predictions<'a>(
    predictions: impl IntoIterator<Item = (u64, &'a ActionSequence)>,
) -> String {
    let mut out = String::new();
    for (id, seq) in predictions {
        let record = PredictionRecord { id, actions: seq.actions().iter().map(|a| a.to_string()).collect() };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub examples: usize,
    pub exact: usize,
    pub semantic: usize,
    pub row_col: usize,
    /// Sum of per-example chance levels.
    pub chance_sum: f64,
}

impl Tally {
    fn pct(n: usize, of: usize) -> f64 {
        if of == 0 {
            0.0
        } else {
            100.0 * n as f64 / of as f64
        }
    }

    pub fn exact_pct(&self) -> f64 {
        Tally::pct(self.exact, self.examples)
    }

    pub fn semantic_pct(&self) -> f64 {
        Tally::pct(self.semantic, self.examples)
    }

    pub fn row_col_pct(&self) -> f64 {
        Tally::pct(self.row_col, self.examples)
    }

    pub fn chance_pct(&self) -> f64 {
        if self.examples == 0 {
            0.0
        } else {
            100.0 * self.chance_sum / self.examples as f64
        }
    }

    fn add(&mut self, o: &Outcome) {
        self.examples += 1;
        self.exact += o.exact as usize;
        self.semantic += o.semantic as usize;
        self.row_col += o.row_col as usize;
        self.chance_sum += o.chance;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub overall: Tally,
    pub exact_pct: f64,
    pub semantic_pct: f64,
    pub row_col_pct: f64,
    pub missing: usize,
    /// Keyed by the referred-target surface form.
    pub by_target: BTreeMap<String, Tally>,
    /// Keyed by primary gold length.
    pub by_length: BTreeMap<usize, Tally>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub splits: BTreeMap<SplitLabel, SplitScore>,
    /// Dataset examples without a prediction; scored as failures.
    pub missing_ids: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    exact: bool,
    semantic: bool,
    row_col: bool,
    chance: f64,
}

fn judge(e: &Example, pred: Option<&ActionSequence>) -> Outcome {
    let chance = chance_level(&e.world);
    match pred {
        None => Outcome { exact: false, semantic: false, row_col: false, chance },
        Some(p) => Outcome {
            exact: exact_match(p, &e.gold),
            semantic: semantic_match(p, &e.frame, &e.world),
            row_col: row_col_analysis(p, &e.world),
            chance,
        },
    }
}

/// Scores every example of the dataset. Predictions for unknown ids are an error.
pub fn score(ds: &Dataset, predictions: &BTreeMap<u64, ActionSequence>) -> Result<ScoreReport, PredictionError> {
    let known: HashMap<u64, ()> = ds.examples().map(|e| (e.id, ())).collect();
    if let Some(id) = predictions.keys().find(|id| !known.contains_key(id)) {
        return Err(PredictionError::UnknownId(*id));
    }
    let mut report = ScoreReport::default();
    for (label, examples) in &ds.splits {
        let outcomes: Vec<Outcome> = examples.par_iter().map(|e| judge(e, predictions.get(&e.id))).collect();
        let mut s = SplitScore::default();
        for (e, o) in examples.iter().zip(&outcomes) {
            if !predictions.contains_key(&e.id) {
                s.missing += 1;
                report.missing_ids.push(e.id);
            }
            s.overall.add(o);
            s.by_target.entry(e.meta.referred_target.clone()).or_default().add(o);
            s.by_length.entry(e.meta.gold_length).or_default().add(o);
        }
        s.exact_pct = s.overall.exact_pct();
        s.semantic_pct = s.overall.semantic_pct();
        s.row_col_pct = s.overall.row_col_pct();
        report.splits.insert(*label, s);
    }
    report.missing_ids.sort_unstable();
    Ok(report)
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22} {:>9} {:>8} {:>9} {:>9} {:>8}", "split", "examples", "exact%", "semantic%", "row/col%", "missing")?;
        for (label, s) in &self.splits {
            writeln!(
                f,
                "{:<22} {:>9} {:>8.2} {:>9.2} {:>9.2} {:>8}",
                label.as_str(),
                s.overall.examples,
                s.exact_pct,
                s.semantic_pct,
                s.row_col_pct,
                s.missing
            )?;
        }
        for (label, s) in self.splits.iter().filter(|(l, _)| l.is_test()) {
            writeln!(f)?;
            writeln!(f, "{label}: by referred target")?;
            writeln!(f, "  {:<26} {:>9} {:>8} {:>8}", "target", "examples", "exact%", "chance%")?;
            for (target, t) in &s.by_target {
                writeln!(f, "  {:<26} {:>9} {:>8.2} {:>8.2}", target, t.examples, t.exact_pct(), t.chance_pct())?;
            }
        }
        for (label, s) in self.splits.iter().filter(|(l, _)| **l == SplitLabel::TestLength) {
            writeln!(f)?;
            writeln!(f, "{label}: by target length")?;
            for (len, t) in &s.by_length {
                writeln!(f, "  {:>4} {:>9} {:>8.2}", len, t.examples, t.exact_pct())?;
            }
        }
        Ok(())
    }
}
