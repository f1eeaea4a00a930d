//! Referent resolution and the goal / manner oracles.

use thiserror::Error;

use super::exec::{run, ExecErrorKind, StepEffect};
use super::{Action, ActionSequence, Cell, Heading, WorldState};
use crate::grammar::{Adverb, SemanticFrame, SizeWord, Verb};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no object matches the referent")]
    NoMatch,
    #[error("referent is ambiguous: {0} objects qualify")]
    Ambiguous(usize),
    #[error("referent resolves to {resolved}, not the designated target {designated}")]
    NotDesignatedTarget { resolved: Cell, designated: Cell },
}

/// Resolves the frame's referent. Shape and color (if given) must match; a
/// size word then picks the strictly smallest or largest matching object.
pub fn resolve_referent(frame: &SemanticFrame, world: &WorldState) -> Result<Cell, ResolveError> {
    let candidates: Vec<_> = world
        .objects
        .iter()
        .filter(|(_, o)| o.shape == frame.shape && frame.color.is_none_or(|c| o.color == c))
        .collect();
    if candidates.is_empty() {
        return Err(ResolveError::NoMatch);
    }
    let chosen: Vec<Cell> = match frame.size {
        None => candidates.iter().map(|(c, _)| **c).collect(),
        Some(word) => {
            let sizes = candidates.iter().map(|(_, o)| o.size);
            let extreme = match word {
                SizeWord::Small => sizes.min(),
                SizeWord::Big => sizes.max(),
            }
            .expect("non-empty candidates");
            candidates.iter().filter(|(_, o)| o.size == extreme).map(|(c, _)| **c).collect()
        }
    };
    match chosen.as_slice() {
        [cell] => Ok(*cell),
        many => Err(ResolveError::Ambiguous(many.len())),
    }
}

/// Whether `final_state` accomplishes the frame's verb on its referent in `initial`.
///
/// Walking requires the agent on the target cell with nothing moved. Pushing
/// (pulling) requires the agent co-located with the target, the target moved
/// only along the agent's heading (its opposite for pulling), and the next cell
/// in that direction blocked by a wall or another object. Other objects must
/// stay put.
pub fn goal_satisfied(
    frame: &SemanticFrame,
    initial: &WorldState,
    final_state: &WorldState,
) -> Result<bool, ResolveError> {
    let target = resolve_referent(frame, initial)?;
    if target != initial.target_cell {
        return Err(ResolveError::NotDesignatedTarget { resolved: target, designated: initial.target_cell });
    }
    if frame.verb == Verb::Walk {
        return Ok(final_state.agent.cell() == target && final_state.objects == initial.objects);
    }

    let end = final_state.target_cell;
    if final_state.agent.cell() != end || final_state.objects.get(&end) != initial.objects.get(&target) {
        return Ok(false);
    }
    let others_unmoved = final_state.objects.len() == initial.objects.len()
        && initial
            .objects
            .iter()
            .filter(|(c, _)| **c != target)
            .all(|(c, o)| *c != end && final_state.objects.get(c) == Some(o));
    if !others_unmoved {
        return Ok(false);
    }
    let direction = match frame.verb {
        Verb::Push => final_state.agent.heading,
        _ => final_state.agent.heading.opposite(),
    };
    let (dr, dc) = target.offset_to(end);
    let (ur, uc) = direction.delta();
    let k = dr * ur + dc * uc;
    if k < 0 || (dr, dc) != (k * ur, k * uc) {
        return Ok(false);
    }
    let blocked = match end.step(direction, final_state.grid_size) {
        None => true,
        Some(next) => final_state.objects.contains_key(&next),
    };
    Ok(blocked)
}

/// Token span `start..=end` that moved the agent (and possibly an object) one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MovementEvent {
    pub start: usize,
    pub end: usize,
    pub direction: Heading,
    pub walk: bool,
}

/// Movement events of an executable sequence; `None` if execution fails.
pub fn movement_events(initial: &WorldState, actions: &ActionSequence) -> Option<Vec<MovementEvent>> {
    let (_, effects) = run(initial, actions.actions()).ok()?;
    Some(events_from_effects(&effects))
}

fn events_from_effects(effects: &[StepEffect]) -> Vec<MovementEvent> {
    effects
        .iter()
        .enumerate()
        .filter_map(|(i, e)| match *e {
            StepEffect::Walked(direction) => Some(MovementEvent { start: i, end: i, direction, walk: true }),
            StepEffect::MovedObject { direction, tokens } => {
                Some(MovementEvent { start: i + 1 - tokens, end: i, direction, walk: false })
            }
            _ => None,
        })
        .collect()
}

/// Why a sequence fails to carry out a frame.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceFault {
    #[error("execution failed: {0}")]
    Execution(ExecErrorKind),
    #[error("goal not satisfied")]
    Goal,
    #[error("manner not satisfied")]
    Manner,
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

/// Executes once and checks goal then manner.
pub fn check_sequence(frame: &SemanticFrame, initial: &WorldState, actions: &ActionSequence) -> Result<(), SequenceFault> {
    let (final_state, effects) = run(initial, actions.actions()).map_err(SequenceFault::Execution)?;
    if !goal_satisfied(frame, initial, &final_state)? {
        return Err(SequenceFault::Goal);
    }
    if !manner_satisfied_events(frame.adverb, initial, actions, &events_from_effects(&effects)) {
        return Err(SequenceFault::Manner);
    }
    Ok(())
}

const LOOK_BOTH_WAYS: [Action; 4] = [Action::LTurn, Action::RTurn, Action::RTurn, Action::LTurn];
const SPIN: [Action; 4] = [Action::LTurn; 4];

/// Whether `actions`, executed from `initial`, carry out the adverb's manner.
/// Sequences that fail to execute never satisfy a manner.
pub fn manner_satisfied(adverb: Option<Adverb>, initial: &WorldState, actions: &ActionSequence) -> bool {
    match movement_events(initial, actions) {
        Some(events) => manner_satisfied_events(adverb, initial, actions, &events),
        None => false,
    }
}

/// Manner check over precomputed movement events.
pub fn manner_satisfied_events(
    adverb: Option<Adverb>,
    initial: &WorldState,
    actions: &ActionSequence,
    events: &[MovementEvent],
) -> bool {
    let a = actions.actions();
    let preceded_by = |e: &MovementEvent, prefix: &[Action]| e.start >= prefix.len() && a[e.start - prefix.len()..e.start] == *prefix;
    match adverb {
        None => true,
        Some(Adverb::Cautiously) => events.iter().all(|e| preceded_by(e, &LOOK_BOTH_WAYS)),
        Some(Adverb::WhileSpinning) => events.iter().all(|e| preceded_by(e, &SPIN)),
        Some(Adverb::Hesitantly) => events.iter().all(|e| a.get(e.end + 1) == Some(&Action::Stay)),
        Some(Adverb::WhileZigzagging) => zigzags(initial, events),
    }
}

/// For diagonal targets, consecutive walk events must switch axis while both axes
/// still have distance left to cover.
fn zigzags(initial: &WorldState, events: &[MovementEvent]) -> bool {
    let target = initial.target_cell;
    let (dr, dc) = initial.agent.cell().offset_to(target);
    if dr == 0 || dc == 0 {
        return true;
    }
    let (mut row, mut col) = (initial.agent.row as isize, initial.agent.col as isize);
    let mut last_axis_horizontal: Option<bool> = None;
    for e in events {
        if e.walk {
            let horizontal = e.direction.is_horizontal();
            if last_axis_horizontal == Some(horizontal) {
                let other_left = if horizontal { target.row as isize - row } else { target.col as isize - col };
                if other_left != 0 {
                    return false;
                }
            }
            last_axis_horizontal = Some(horizontal);
        }
        let (ur, uc) = e.direction.delta();
        row += ur;
        col += uc;
    }
    true
}
