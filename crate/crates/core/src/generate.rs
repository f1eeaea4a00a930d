//! Pool generation: every command paired with sampled worlds and verified golds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{enumerate_commands, parse, referred_target, CommandTokens, GrammarConfig, GrammarConfigError, ParseError};
use crate::planner::{gold_set, PlanError};
use crate::sampler::{
    build_recipe, candidate_targets, enumerate_slots, sample_world, HeadingPolicy, ObjectUniverse, SampleError,
};
use crate::seed::rng_for;
use crate::splits::{Example, ExampleMeta, SplitLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub grid_size: usize,
    pub samples_per_slot: usize,
    pub grammar: GrammarConfig,
}

impl SuiteConfig {
    pub fn compositional() -> Self {
        SuiteConfig { grid_size: 6, samples_per_slot: 2, grammar: GrammarConfig::default() }
    }

    /// The length suite: a larger grid and no adverbs.
    pub fn length() -> Self {
        SuiteConfig {
            grid_size: 12,
            samples_per_slot: 1,
            grammar: GrammarConfig { adverbs: Vec::new(), ..GrammarConfig::default() },
        }
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig::compositional()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub heading_policy: HeadingPolicy,
    pub max_retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { heading_policy: HeadingPolicy::East, max_retries: 100 }
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Grammar(#[from] GrammarConfigError),
    #[error("grid size {0} is below the minimum of 3")]
    GridTooSmall(usize),
    #[error("enumerated command `{command}` does not parse: {source}")]
    Parse { command: String, source: ParseError },
    #[error("planning failed for `{command}`: {source}")]
    Plan { command: String, source: PlanError },
}

/// Examples for one command. Ids are left at zero; seeds depend only on
/// `seed`, the command index and the per-command loop indices.
pub fn generate_for_command(
    suite: &SuiteConfig,
    sampler: &SamplerConfig,
    seed: u64,
    index: usize,
    command: &CommandTokens,
) -> Result<Vec<Example>, GenerateError> {
    let frame = parse(command).map_err(|source| GenerateError::Parse { command: command.to_string(), source })?;
    let universe = ObjectUniverse { colors: suite.grammar.colors.clone(), shapes: suite.grammar.shapes.clone() };
    let referred = referred_target(command);
    let slots = enumerate_slots(suite.grid_size);
    let mut out = Vec::new();
    for (ti, target) in candidate_targets(&frame, &universe).into_iter().enumerate() {
        for (si, slot) in slots.iter().enumerate() {
            for sample in 0..suite.samples_per_slot {
                let mut rng = rng_for(seed, &[index as u64, ti as u64, si as u64, sample as u64]);
                let Ok(recipe) = build_recipe(&frame, target, &universe, &mut rng) else { continue };
                let world = match sample_world(
                    &frame,
                    *slot,
                    &recipe,
                    suite.grid_size,
                    sampler.heading_policy,
                    sampler.max_retries,
                    &mut rng,
                ) {
                    Ok(w) => w,
                    Err(SampleError::InfeasibleSlot { .. } | SampleError::NoRoom { .. }) => break,
                    Err(SampleError::RetriesExhausted(_)) => continue,
                };
                let gold = gold_set(&frame, &world)
                    .map_err(|source| GenerateError::Plan { command: command.to_string(), source })?;
                out.push(Example {
                    id: 0,
                    command: command.clone(),
                    frame,
                    meta: ExampleMeta {
                        referred_target: referred.clone(),
                        target,
                        target_cell: world.target_cell,
                        direction: slot.direction,
                        distance: slot.distance,
                        gold_length: gold[0].len(),
                        split: SplitLabel::Train,
                        kshot: false,
                    },
                    world,
                    gold,
                });
            }
        }
    }
    Ok(out)
}

/// Runs `f` on a pool of `jobs` threads, or rayon's global pool when `jobs` is `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool builds")
            .install(f),
        None => f(),
    }
}

/// Generates the whole pool, partitioned by command. Output is independent of `jobs`:
/// examples are merged in command order and numbered sequentially.
pub fn generate_pool(
    suite: &SuiteConfig,
    sampler: &SamplerConfig,
    seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<Example>, GenerateError> {
    if suite.grid_size < 3 {
        return Err(GenerateError::GridTooSmall(suite.grid_size));
    }
    let commands = enumerate_commands(&suite.grammar)?;
    let per_command: Vec<Vec<Example>> = with_jobs(jobs, || {
        commands
            .par_iter()
            .enumerate()
            .map(|(i, c)| generate_for_command(suite, sampler, seed, i, c))
            .collect::<Result<_, _>>()
    })?;
    let mut pool: Vec<Example> = per_command.into_iter().flatten().collect();
    for (id, e) in pool.iter_mut().enumerate() {
        e.id = id as u64;
    }
    Ok(pool)
}
