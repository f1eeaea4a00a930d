//! Split predicates and the assignment of examples to train, dev and test sets.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attributes::{Color, Shape};
use crate::grammar::{Adverb, CommandTokens, SemanticFrame, Verb};
use crate::sampler::RelativeDirection;
use crate::seed::rng_for;
use crate::world::{ActionSequence, Cell, ObjectSpec, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleMeta {
    /// Determiner phrase without the determiner, e.g. "small red circle".
    pub referred_target: String,
    pub target: ObjectSpec,
    pub target_cell: Cell,
    pub direction: RelativeDirection,
    pub distance: usize,
    /// Length of the primary (horizontal-first) gold sequence.
    pub gold_length: usize,
    pub split: SplitLabel,
    /// Set on held-out adverb examples admitted to train as few-shot demonstrations.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub kshot: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub id: u64,
    pub command: CommandTokens,
    pub frame: SemanticFrame,
    pub world: WorldState,
    /// Acceptable sequences; the first is the primary gold.
    pub gold: Vec<ActionSequence>,
    pub meta: ExampleMeta,
}

impl Example {
    /// SHA-256 over the command and world, identifying an example by content.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(&(&self.command, &self.world)).expect("example serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn primary_gold(&self) -> &ActionSequence {
        &self.gold[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitLabel {
    Train,
    Dev,
    TestRandom,
    TestYellowSquares,
    TestRedSquares,
    TestNovelDirection,
    TestRelativity,
    TestClassInference,
    TestAdverbKshot,
    TestAdverbToVerb,
    TestLength,
}

impl SplitLabel {
    pub const ALL: [SplitLabel; 11] = [
        SplitLabel::Train,
        SplitLabel::Dev,
        SplitLabel::TestRandom,
        SplitLabel::TestYellowSquares,
        SplitLabel::TestRedSquares,
        SplitLabel::TestNovelDirection,
        SplitLabel::TestRelativity,
        SplitLabel::TestClassInference,
        SplitLabel::TestAdverbKshot,
        SplitLabel::TestAdverbToVerb,
        SplitLabel::TestLength,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitLabel::Train => "train",
            SplitLabel::Dev => "dev",
            SplitLabel::TestRandom => "test_random",
            SplitLabel::TestYellowSquares => "test_yellow_squares",
            SplitLabel::TestRedSquares => "test_red_squares",
            SplitLabel::TestNovelDirection => "test_novel_direction",
            SplitLabel::TestRelativity => "test_relativity",
            SplitLabel::TestClassInference => "test_class_inference",
            SplitLabel::TestAdverbKshot => "test_adverb_kshot",
            SplitLabel::TestAdverbToVerb => "test_adverb_to_verb",
            SplitLabel::TestLength => "test_length",
        }
    }

    pub fn is_test(self) -> bool {
        !matches!(self, SplitLabel::Train | SplitLabel::Dev)
    }

    /// The split whose test set this label names.
    pub fn split_name(self) -> Option<SplitName> {
        SplitName::ALL.into_iter().find(|n| n.test_label() == self)
    }
}

impl fmt::Display for SplitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitLabel {
    type Err = UnknownSplit;

    fn from_str(s: &str) -> Result<Self, UnknownSplit> {
        SplitLabel::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| UnknownSplit(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown split `{0}`")]
pub struct UnknownSplit(pub String);

/// The nine splits, lettered A through I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    Random,
    YellowSquares,
    RedSquares,
    NovelDirection,
    Relativity,
    ClassInference,
    AdverbKshot,
    AdverbToVerb,
    Length,
}

impl SplitName {
    pub const ALL: [SplitName; 9] = [
        SplitName::Random,
        SplitName::YellowSquares,
        SplitName::RedSquares,
        SplitName::NovelDirection,
        SplitName::Relativity,
        SplitName::ClassInference,
        SplitName::AdverbKshot,
        SplitName::AdverbToVerb,
        SplitName::Length,
    ];

    /// Predicate splits carved from the compositional pool, in default priority order.
    pub const COMPOSITIONAL: [SplitName; 7] = [
        SplitName::YellowSquares,
        SplitName::RedSquares,
        SplitName::NovelDirection,
        SplitName::Relativity,
        SplitName::ClassInference,
        SplitName::AdverbKshot,
        SplitName::AdverbToVerb,
    ];

    pub fn letter(self) -> char {
        (b'A' + SplitName::ALL.iter().position(|n| *n == self).expect("listed") as u8) as char
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Random => "random",
            SplitName::YellowSquares => "yellow_squares",
            SplitName::RedSquares => "red_squares",
            SplitName::NovelDirection => "novel_direction",
            SplitName::Relativity => "relativity",
            SplitName::ClassInference => "class_inference",
            SplitName::AdverbKshot => "adverb_kshot",
            SplitName::AdverbToVerb => "adverb_to_verb",
            SplitName::Length => "length",
        }
    }

    pub fn test_label(self) -> SplitLabel {
        match self {
            SplitName::Random => SplitLabel::TestRandom,
            SplitName::YellowSquares => SplitLabel::TestYellowSquares,
            SplitName::RedSquares => SplitLabel::TestRedSquares,
            SplitName::NovelDirection => SplitLabel::TestNovelDirection,
            SplitName::Relativity => SplitLabel::TestRelativity,
            SplitName::ClassInference => SplitLabel::TestClassInference,
            SplitName::AdverbKshot => SplitLabel::TestAdverbKshot,
            SplitName::AdverbToVerb => SplitLabel::TestAdverbToVerb,
            SplitName::Length => SplitLabel::TestLength,
        }
    }

    /// Evaluates the split's predicate. The random split has none.
    pub fn matches(self, example: &Example, length_threshold: usize) -> Option<bool> {
        Some(match self {
            SplitName::Random => return None,
            SplitName::YellowSquares => matches_b(example),
            SplitName::RedSquares => matches_c(example),
            SplitName::NovelDirection => matches_d(example),
            SplitName::Relativity => matches_e(example),
            SplitName::ClassInference => matches_f(example),
            SplitName::AdverbKshot => matches_g(example),
            SplitName::AdverbToVerb => matches_h(example),
            SplitName::Length => matches_i(example, length_threshold),
        })
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepts a split name or its letter, case-insensitively.
impl FromStr for SplitName {
    type Err = UnknownSplit;

    fn from_str(s: &str) -> Result<Self, UnknownSplit> {
        let lower = s.trim().to_ascii_lowercase();
        SplitName::ALL
            .into_iter()
            .find(|n| n.as_str() == lower || (lower.len() == 1 && n.letter().to_ascii_lowercase().to_string() == lower))
            .ok_or_else(|| UnknownSplit(s.to_string()))
    }
}

pub fn matches_b(ex: &Example) -> bool {
    let t = &ex.meta.target;
    t.color == Color::Yellow
        && t.shape == Shape::Square
        && ex.frame.color == Some(Color::Yellow)
        && ex.frame.shape == Shape::Square
}

pub fn matches_c(ex: &Example) -> bool {
    ex.meta.target.color == Color::Red && ex.meta.target.shape == Shape::Square
}

pub fn matches_d(ex: &Example) -> bool {
    let agent = ex.world.agent;
    let target = ex.world.target_cell;
    target.row > agent.row && target.col < agent.col
}

pub fn matches_e(ex: &Example) -> bool {
    let t = &ex.meta.target;
    t.shape == Shape::Circle
        && t.size.get() == 2
        && !ex.world.objects.values().any(|o| o.shape == Shape::Circle && o.size < t.size)
        && ex.command.contains("small")
}

pub fn matches_f(ex: &Example) -> bool {
    ex.frame.verb == Verb::Push && ex.meta.target.shape == Shape::Square && ex.meta.target.size.get() == 3
}

pub fn matches_g(ex: &Example) -> bool {
    ex.frame.adverb == Some(Adverb::Cautiously)
}

pub fn matches_h(ex: &Example) -> bool {
    ex.frame.adverb == Some(Adverb::WhileSpinning) && ex.frame.verb == Verb::Pull
}

pub fn matches_i(ex: &Example, threshold: usize) -> bool {
    ex.meta.gold_length > threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub enabled: Vec<SplitName>,
    /// Tie-break order for examples matching several predicates.
    pub priority: Vec<SplitName>,
    /// Held-out adverb examples admitted to train.
    pub kshot: usize,
    pub dev_size: usize,
    pub random_test_size: usize,
    /// Upper bound on dev and random test, each as a fraction of the eligible pool.
    pub max_holdout_fraction: f64,
    /// Optional per-split size caps, applied by seeded uniform down-sampling.
    pub caps: BTreeMap<SplitLabel, usize>,
    pub length_threshold: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            enabled: SplitName::ALL.to_vec(),
            priority: SplitName::COMPOSITIONAL.to_vec(),
            kshot: 1,
            dev_size: 2000,
            random_test_size: 19282,
            max_holdout_fraction: 0.1,
            caps: BTreeMap::new(),
            length_threshold: 15,
        }
    }
}

impl SplitConfig {
    pub fn is_enabled(&self, name: SplitName) -> bool {
        self.enabled.contains(&name)
    }

    pub fn validate(&self) -> Result<(), AssignError> {
        for name in &self.priority {
            if !SplitName::COMPOSITIONAL.contains(name) {
                return Err(AssignError::NotRankable(*name));
            }
        }
        for name in SplitName::COMPOSITIONAL {
            if self.is_enabled(name) && !self.priority.contains(&name) {
                return Err(AssignError::MissingPriority(name));
            }
        }
        if !(0.0..=1.0).contains(&self.max_holdout_fraction) {
            return Err(AssignError::BadFraction(self.max_holdout_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignError {
    #[error("split `{0}` is enabled but missing from the priority order")]
    MissingPriority(SplitName),
    #[error("split `{0}` is not a compositional predicate and cannot be ranked")]
    NotRankable(SplitName),
    #[error("holdout fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("command `{0}` has no example of length <= threshold for train")]
    CommandMissingFromTrain(String),
}

/// Bookkeeping from an assignment pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentLog {
    pub pool_size: usize,
    pub duplicates_removed: usize,
    /// Examples matching several predicates, keyed by the matching letters ("C+D").
    pub overlaps: BTreeMap<String, usize>,
    /// Held-out adverb test examples discarded for exceeding the longest train sequence.
    pub kshot_dropped_long: usize,
    /// Examples removed from each split by its cap.
    pub capped: BTreeMap<SplitLabel, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub splits: BTreeMap<SplitLabel, Vec<Example>>,
    pub log: AssignmentLog,
}

const STREAM_KSHOT: u64 = 1;
const STREAM_HOLDOUT: u64 = 2;
const STREAM_CAP: u64 = 3;

/// Removes examples whose content hash repeats an earlier one (by id).
pub fn dedupe(mut pool: Vec<Example>) -> (Vec<Example>, usize) {
    pool.sort_by_key(|e| e.id);
    let before = pool.len();
    let mut seen = HashSet::with_capacity(before);
    pool.retain(|e| seen.insert(e.content_hash()));
    let removed = before - pool.len();
    (pool, removed)
}

/// Moves `k` of the held-out adverb examples to train. The full list is shuffled
/// under a fixed seed independent of `k`, so a smaller `k` picks a prefix of a larger one.
pub fn carve_kshot(mut held: Vec<Example>, k: usize, seed: u64) -> (Vec<Example>, Vec<Example>) {
    held.sort_by_key(|e| e.id);
    held.shuffle(&mut rng_for(seed, &[STREAM_KSHOT]));
    let test = held.split_off(k.min(held.len()));
    let mut train = held;
    for e in &mut train {
        e.meta.kshot = true;
    }
    (train, test)
}

/// Assigns a compositional pool to train, dev, the random test and every enabled predicate test.
pub fn assign_all(pool: Vec<Example>, cfg: &SplitConfig, seed: u64) -> Result<Assignment, AssignError> {
    cfg.validate()?;
    let mut log = AssignmentLog { pool_size: pool.len(), ..Default::default() };
    let (pool, removed) = dedupe(pool);
    log.duplicates_removed = removed;

    let ranked: Vec<SplitName> = cfg.priority.iter().copied().filter(|n| cfg.is_enabled(*n)).collect();
    let mut held: BTreeMap<SplitName, Vec<Example>> = BTreeMap::new();
    let mut eligible = Vec::new();
    for ex in pool {
        let hits: Vec<SplitName> =
            ranked.iter().copied().filter(|n| n.matches(&ex, cfg.length_threshold) == Some(true)).collect();
        if hits.len() > 1 {
            let mut letters: Vec<char> = hits.iter().map(|n| n.letter()).collect();
            letters.sort_unstable();
            let key = letters.iter().map(char::to_string).collect::<Vec<_>>().join("+");
            *log.overlaps.entry(key).or_default() += 1;
        }
        match hits.first() {
            Some(name) => held.entry(*name).or_default().push(ex),
            None => eligible.push(ex),
        }
    }

    let mut splits: BTreeMap<SplitLabel, Vec<Example>> = BTreeMap::new();
    let mut train = Vec::new();
    if cfg.is_enabled(SplitName::Random) || cfg.dev_size > 0 {
        let bound = (eligible.len() as f64 * cfg.max_holdout_fraction).floor() as usize;
        let n_dev = cfg.dev_size.min(bound);
        let n_random = if cfg.is_enabled(SplitName::Random) { cfg.random_test_size.min(bound) } else { 0 };
        eligible.shuffle(&mut rng_for(seed, &[STREAM_HOLDOUT]));
        let mut rest = eligible.split_off((n_dev + n_random).min(eligible.len()));
        let random = eligible.split_off(n_dev.min(eligible.len()));
        let dev = eligible;
        let train_commands: HashSet<&CommandTokens> = rest.iter().map(|e| &e.command).collect();
        let (dev, dev_orphans): (Vec<_>, Vec<_>) = dev.into_iter().partition(|e| train_commands.contains(&e.command));
        let (random, random_orphans): (Vec<_>, Vec<_>) =
            random.into_iter().partition(|e| train_commands.contains(&e.command));
        rest.extend(dev_orphans);
        rest.extend(random_orphans);
        splits.insert(SplitLabel::Dev, dev);
        if cfg.is_enabled(SplitName::Random) {
            splits.insert(SplitLabel::TestRandom, random);
        }
        train = rest;
    } else {
        train.append(&mut eligible);
    }

    let kshot_test = held.remove(&SplitName::AdverbKshot).map(|g| carve_kshot(g, cfg.kshot, seed));
    if cfg.is_enabled(SplitName::AdverbKshot) {
        let (shots, mut test) = kshot_test.unwrap_or_default();
        train.extend(shots);
        let longest = train.iter().map(|e| e.meta.gold_length).max().unwrap_or(0);
        let before = test.len();
        test.retain(|e| e.meta.gold_length <= longest);
        log.kshot_dropped_long = before - test.len();
        splits.insert(SplitLabel::TestAdverbKshot, test);
    }
    for (name, examples) in held {
        splits.insert(name.test_label(), examples);
    }
    for name in SplitName::COMPOSITIONAL {
        if cfg.is_enabled(name) {
            splits.entry(name.test_label()).or_default();
        }
    }
    splits.insert(SplitLabel::Train, train);

    apply_caps(&mut splits, cfg, seed, &mut log);
    Ok(Assignment { splits: finalize(splits), log })
}

/// Splits a pool by primary gold length; every command must keep a train example.
pub fn build_length_split(pool: Vec<Example>, cfg: &SplitConfig, seed: u64) -> Result<Assignment, AssignError> {
    let mut log = AssignmentLog { pool_size: pool.len(), ..Default::default() };
    let (pool, removed) = dedupe(pool);
    log.duplicates_removed = removed;
    let commands: BTreeSet<CommandTokens> = pool.iter().map(|e| e.command.clone()).collect();
    let (test, train): (Vec<_>, Vec<_>) = pool.into_iter().partition(|e| matches_i(e, cfg.length_threshold));
    let covered: HashSet<&CommandTokens> = train.iter().map(|e| &e.command).collect();
    if let Some(missing) = commands.iter().find(|c| !covered.contains(c)) {
        return Err(AssignError::CommandMissingFromTrain(missing.to_string()));
    }
    let mut splits = BTreeMap::from([(SplitLabel::Train, train), (SplitLabel::TestLength, test)]);
    apply_caps(&mut splits, cfg, seed, &mut log);
    Ok(Assignment { splits: finalize(splits), log })
}

fn apply_caps(splits: &mut BTreeMap<SplitLabel, Vec<Example>>, cfg: &SplitConfig, seed: u64, log: &mut AssignmentLog) {
    for (label, &cap) in &cfg.caps {
        if !label.is_test() {
            continue;
        }
        if let Some(examples) = splits.get_mut(label) {
            if examples.len() > cap {
                examples.sort_by_key(|e| e.id);
                examples.shuffle(&mut rng_for(seed, &[STREAM_CAP, *label as u64]));
                log.capped.insert(*label, examples.len() - cap);
                examples.truncate(cap);
            }
        }
    }
}

fn finalize(mut splits: BTreeMap<SplitLabel, Vec<Example>>) -> BTreeMap<SplitLabel, Vec<Example>> {
    for (label, examples) in splits.iter_mut() {
        examples.sort_by_key(|e| e.id);
        for e in examples.iter_mut() {
            e.meta.split = *label;
        }
    }
    splits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse, referred_target};
    use crate::sampler::{enumerate_slots, SituationSlot};
    use crate::world::{Heading, Pose};

    fn example(id: u64, command: &str, agent: (usize, usize), objects: &[((usize, usize), ObjectSpec)]) -> Example {
        let command = CommandTokens::from_words(command);
        let frame = parse(&command).unwrap();
        let mut world = WorldState::empty(6, Pose::new(agent.0, agent.1, Heading::East));
        for ((r, c), o) in objects {
            world = world.with_object(Cell::new(*r, *c), *o);
        }
        let (cell, target) = objects[0];
        let target_cell = Cell::new(cell.0, cell.1);
        world = world.with_target(target_cell);
        let (dr, dc) = world.agent.cell().offset_to(target_cell);
        Example {
            id,
            meta: ExampleMeta {
                referred_target: referred_target(&command),
                target,
                target_cell,
                direction: RelativeDirection::from_offset(dr, dc).unwrap_or(RelativeDirection::East),
                distance: dr.unsigned_abs() + dc.unsigned_abs(),
                gold_length: 3,
                split: SplitLabel::Train,
                kshot: false,
            },
            command,
            frame,
            world,
            gold: vec!["walk".parse().unwrap()],
        }
    }

    fn sq(color: Color, size: u8) -> ObjectSpec {
        ObjectSpec::new(Shape::Square, color, size)
    }

    #[test]
    fn yellow_squares() {
        assert!(matches_b(&example(0, "walk to the yellow square", (0, 0), &[((1, 1), sq(Color::Yellow, 2))])));
        let small = example(
            0,
            "walk to the small square",
            (0, 0),
            &[((1, 1), sq(Color::Yellow, 1)), ((2, 2), sq(Color::Red, 3))],
        );
        assert!(!matches_b(&small));
        assert!(matches_b(&example(0, "push the big yellow square", (0, 0), &[((1, 1), sq(Color::Yellow, 4))])));
    }

    #[test]
    fn red_squares_regardless_of_phrasing() {
        assert!(matches_c(&example(0, "walk to the square", (0, 0), &[((1, 1), sq(Color::Red, 2))])));
        assert!(matches_c(&example(0, "walk to the red square", (0, 0), &[((1, 1), sq(Color::Red, 2))])));
        let circle = ObjectSpec::new(Shape::Circle, Color::Red, 2);
        assert!(!matches_c(&example(0, "walk to the red circle", (0, 0), &[((1, 1), circle)])));
    }

    #[test]
    fn novel_direction() {
        let o = sq(Color::Blue, 1);
        assert!(matches_d(&example(0, "walk to the square", (2, 4), &[((5, 1), o)])));
        assert!(!matches_d(&example(0, "walk to the square", (2, 4), &[((5, 4), o)])));
    }

    #[test]
    fn south_west_is_one_of_four_diagonal_directions() {
        let slots = enumerate_slots(6);
        let diagonal: Vec<&SituationSlot> = slots.iter().filter(|s| s.direction.is_diagonal()).collect();
        let sw = diagonal.iter().filter(|s| s.direction == RelativeDirection::SouthWest).count();
        assert_eq!(sw * 4, diagonal.len());
    }

    #[test]
    fn relativity() {
        let c = |color, size| ObjectSpec::new(Shape::Circle, color, size);
        let small = example(0, "walk to the small circle", (0, 0), &[((1, 1), c(Color::Green, 2)), ((3, 3), c(Color::Red, 4))]);
        assert!(matches_e(&small));
        let big = example(0, "walk to the big circle", (0, 0), &[((1, 1), c(Color::Green, 2)), ((3, 3), c(Color::Red, 1))]);
        assert!(!matches_e(&big));
        let colored = example(0, "walk to the small red circle", (0, 0), &[((1, 1), c(Color::Red, 2)), ((3, 3), c(Color::Red, 3))]);
        assert!(matches_e(&colored));
    }

    #[test]
    fn class_inference_and_adverb_to_verb() {
        assert!(matches_f(&example(0, "push the square", (0, 0), &[((1, 1), sq(Color::Green, 3))])));
        assert!(!matches_f(&example(0, "pull the square", (0, 0), &[((1, 1), sq(Color::Green, 3))])));
        let circle = ObjectSpec::new(Shape::Circle, Color::Green, 3);
        assert!(!matches_f(&example(0, "push the circle", (0, 0), &[((1, 1), circle)])));

        assert!(matches_h(&example(0, "pull the circle while spinning", (0, 0), &[((1, 1), circle)])));
        assert!(!matches_h(&example(0, "push the circle while spinning", (0, 0), &[((1, 1), circle)])));
        assert!(!matches_h(&example(0, "pull the circle hesitantly", (0, 0), &[((1, 1), circle)])));
    }

    #[test]
    fn split_names_parse_from_letters() {
        assert_eq!("C".parse::<SplitName>().unwrap(), SplitName::RedSquares);
        assert_eq!("length".parse::<SplitName>().unwrap(), SplitName::Length);
        assert_eq!(SplitName::Length.letter(), 'I');
        assert!("z".parse::<SplitName>().is_err());
    }

    fn toy_pool() -> Vec<Example> {
        let circle = ObjectSpec::new(Shape::Circle, Color::Blue, 1);
        let mut pool = Vec::new();
        let mut id = 0;
        for agent_col in 0..6 {
            for row in 0..6 {
                for cmd in ["walk to the circle", "walk to the circle cautiously", "push the circle"] {
                    if row == 0 && agent_col == 0 {
                        continue;
                    }
                    pool.push(example(id, cmd, (0, agent_col), &[((row, 0), circle)]));
                    id += 1;
                }
            }
        }
        pool
    }

    #[test]
    fn kshot_is_nested_and_sound() {
        let cfg = |k| SplitConfig { kshot: k, dev_size: 5, random_test_size: 5, ..Default::default() };
        let one = assign_all(toy_pool(), &cfg(1), 9).unwrap();
        let five = assign_all(toy_pool(), &cfg(5), 9).unwrap();
        let ids = |a: &Assignment| a.splits[&SplitLabel::Train].iter().map(|e| e.id).collect::<BTreeSet<_>>();
        assert!(ids(&one).is_subset(&ids(&five)));
        let shots = one.splits[&SplitLabel::Train].iter().filter(|e| matches_g(e)).count();
        assert_eq!(shots, 1);
        assert!(one.splits[&SplitLabel::TestAdverbKshot].iter().all(matches_g));

        let zero = assign_all(toy_pool(), &cfg(0), 9).unwrap();
        assert_eq!(zero.splits[&SplitLabel::Train].iter().filter(|e| matches_g(e)).count(), 0);
    }

    #[test]
    fn overlap_goes_to_first_priority() {
        let red = sq(Color::Red, 2);
        let ex = example(0, "walk to the square", (0, 4), &[((3, 1), red)]);
        assert!(matches_c(&ex) && matches_d(&ex));
        let a = assign_all(vec![ex], &SplitConfig::default(), 1).unwrap();
        assert_eq!(a.splits[&SplitLabel::TestRedSquares].len(), 1);
        assert!(a.splits[&SplitLabel::TestNovelDirection].is_empty());
        assert_eq!(a.log.overlaps.get("C+D"), Some(&1));
    }

    #[test]
    fn duplicates_are_removed_and_missing_priority_rejected() {
        let o = sq(Color::Blue, 2);
        let a = example(0, "walk to the square", (0, 0), &[((1, 1), o)]);
        let mut b = a.clone();
        b.id = 1;
        let (kept, removed) = dedupe(vec![b, a]);
        assert_eq!((kept.len(), removed, kept[0].id), (1, 1, 0));

        let cfg = SplitConfig { priority: vec![SplitName::RedSquares], ..Default::default() };
        assert_eq!(cfg.validate(), Err(AssignError::MissingPriority(SplitName::YellowSquares)));
    }

    #[test]
    fn length_threshold_is_inclusive_for_train() {
        let o = sq(Color::Blue, 2);
        let mut short = example(0, "walk to the square", (0, 0), &[((1, 1), o)]);
        short.meta.gold_length = 15;
        let mut long = example(1, "walk to the square", (0, 0), &[((2, 2), o)]);
        long.meta.gold_length = 16;
        let a = build_length_split(vec![short, long], &SplitConfig::default(), 0).unwrap();
        assert_eq!(a.splits[&SplitLabel::Train][0].id, 0);
        assert_eq!(a.splits[&SplitLabel::TestLength][0].id, 1);

        let mut only_long = example(2, "push the square", (0, 0), &[((2, 2), o)]);
        only_long.meta.gold_length = 20;
        assert!(matches!(
            build_length_split(vec![only_long], &SplitConfig::default(), 0),
            Err(AssignError::CommandMissingFromTrain(_))
        ));
    }
}
