//! Oracle interpreter: gold action sequences for a frame in a world.
//!
//! Routes travel one axis fully and then the other (horizontal first by
//! default), turning by the minimal rotation with ties resolved as two left
//! turns. Push and pull act along the heading the agent arrives with: pushing
//! moves the target forward, pulling drags it back the way the agent came,
//! in both cases until a wall or another object stops it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{Adverb, SemanticFrame, Verb};
use crate::world::{check_sequence, resolve_referent, Action, ActionSequence, Cell, Heading, ResolveError, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    HorizontalFirst,
    VerticalFirst,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::HorizontalFirst, Convention::VerticalFirst];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leg {
    pub direction: Heading,
    pub cells: usize,
}

/// The verb phase after arriving on the target cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interaction {
    pub action: Action,
    /// Direction the object travels.
    pub direction: Heading,
    pub cells: usize,
    pub tokens_per_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutePlan {
    pub approach: Vec<Leg>,
    pub interaction: Option<Interaction>,
}

/// A plan element: a bare turn, or the tokens of one movement event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanItem {
    Turn(Action),
    Move(Vec<Action>),
}

/// Unadorned plan with movement events marked.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MarkedPlan(pub Vec<PlanItem>);

impl MarkedPlan {
    pub fn movement_events(&self) -> usize {
        self.0.iter().filter(|i| matches!(i, PlanItem::Move(_))).count()
    }

    pub fn to_sequence(&self) -> ActionSequence {
        apply_adverb(self, None)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("world does not satisfy the frame's referent: {0}")]
    InvalidWorld(#[from] ResolveError),
    #[error("referent resolves to {resolved} but the world designates {designated}")]
    WrongTarget { resolved: Cell, designated: Cell },
    #[error("planned sequence failed executor verification ({convention:?}): {reason}")]
    Unverified { convention: Convention, reason: String },
}

/// Minimal rotation from one heading to another; a reversal is two left turns.
pub fn rotation(from: Heading, to: Heading) -> Vec<Action> {
    let idx = |h: Heading| Heading::ALL.iter().position(|x| *x == h).expect("heading listed");
    match (idx(to) + 4 - idx(from)) % 4 {
        0 => vec![],
        1 => vec![Action::RTurn],
        2 => vec![Action::LTurn, Action::LTurn],
        _ => vec![Action::LTurn],
    }
}

pub fn plan_route(frame: &SemanticFrame, world: &WorldState, convention: Convention) -> Result<RoutePlan, PlanError> {
    let resolved = resolve_referent(frame, world)?;
    if resolved != world.target_cell {
        return Err(PlanError::WrongTarget { resolved, designated: world.target_cell });
    }
    Ok(route_to(frame, world, world.target_cell, convention))
}

/// Route to an arbitrary occupied cell, without checking the referent.
fn route_to(frame: &SemanticFrame, world: &WorldState, target: Cell, convention: Convention) -> RoutePlan {
    let (dr, dc) = world.agent.cell().offset_to(target);
    let horizontal = Leg {
        direction: if dc >= 0 { Heading::East } else { Heading::West },
        cells: dc.unsigned_abs(),
    };
    let vertical = Leg {
        direction: if dr >= 0 { Heading::South } else { Heading::North },
        cells: dr.unsigned_abs(),
    };
    let (first, second) = match convention {
        Convention::HorizontalFirst => (horizontal, vertical),
        Convention::VerticalFirst => (vertical, horizontal),
    };

    let approach: Vec<Leg> = if frame.adverb == Some(Adverb::WhileZigzagging) && dr != 0 && dc != 0 {
        let (mut a, mut b) = (first.cells, second.cells);
        let mut legs = Vec::with_capacity(a + b);
        let mut take_first = true;
        while a + b > 0 {
            if (take_first && a > 0) || b == 0 {
                legs.push(Leg { direction: first.direction, cells: 1 });
                a -= 1;
            } else {
                legs.push(Leg { direction: second.direction, cells: 1 });
                b -= 1;
            }
            take_first = !take_first;
        }
        legs
    } else {
        [first, second].into_iter().filter(|l| l.cells > 0).collect()
    };

    let arrival = approach.last().map_or(world.agent.heading, |l| l.direction);
    let interaction = match frame.verb {
        Verb::Walk => None,
        verb => {
            let (action, direction) = if verb == Verb::Push {
                (Action::Push, arrival)
            } else {
                (Action::Pull, arrival.opposite())
            };
            let mut cells = 0;
            let mut at = target;
            while let Some(next) = at.step(direction, world.grid_size) {
                if world.objects.contains_key(&next) {
                    break;
                }
                cells += 1;
                at = next;
            }
            let tokens_per_cell = world.objects.get(&target).map_or(1, |o| o.weight_class().tokens_per_cell());
            Some(Interaction { action, direction, cells, tokens_per_cell })
        }
    };
    RoutePlan { approach, interaction }
}

/// Expands a route into turns and marked movement events.
pub fn mark(route: &RoutePlan, start: Heading) -> MarkedPlan {
    let mut items = Vec::new();
    let mut heading = start;
    for leg in &route.approach {
        items.extend(rotation(heading, leg.direction).into_iter().map(PlanItem::Turn));
        heading = leg.direction;
        items.extend((0..leg.cells).map(|_| PlanItem::Move(vec![Action::Walk])));
    }
    if let Some(i) = route.interaction {
        for _ in 0..i.cells {
            items.push(PlanItem::Move(vec![i.action; i.tokens_per_cell]));
        }
    }
    MarkedPlan(items)
}

/// Decorates each movement event according to the adverb. Zigzagging is
/// realized during routing and leaves the plan unchanged here.
pub fn apply_adverb(plan: &MarkedPlan, adverb: Option<Adverb>) -> ActionSequence {
    let (prefix, suffix): (&[Action], &[Action]) = match adverb {
        Some(Adverb::Cautiously) => (&[Action::LTurn, Action::RTurn, Action::RTurn, Action::LTurn], &[]),
        Some(Adverb::WhileSpinning) => (&[Action::LTurn; 4], &[]),
        Some(Adverb::Hesitantly) => (&[], &[Action::Stay]),
        Some(Adverb::WhileZigzagging) | None => (&[], &[]),
    };
    let mut out = Vec::new();
    for item in &plan.0 {
        match item {
            PlanItem::Turn(a) => out.push(*a),
            PlanItem::Move(tokens) => {
                out.extend_from_slice(prefix);
                out.extend_from_slice(tokens);
                out.extend_from_slice(suffix);
            }
        }
    }
    ActionSequence(out)
}

pub fn plan(frame: &SemanticFrame, world: &WorldState, convention: Convention) -> Result<ActionSequence, PlanError> {
    let route = plan_route(frame, world, convention)?;
    Ok(apply_adverb(&mark(&route, world.agent.heading), frame.adverb))
}

/// Carries out the frame's verb and adverb on whatever object sits at `cell`,
/// ignoring the referent. Useful for scripted baseline agents.
pub fn plan_to_cell(frame: &SemanticFrame, world: &WorldState, cell: Cell, convention: Convention) -> ActionSequence {
    let route = route_to(frame, world, cell, convention);
    apply_adverb(&mark(&route, world.agent.heading), frame.adverb)
}

/// Acceptable gold sequences, primary (horizontal-first) convention first,
/// deduplicated. Each member is checked against the executor before returning.
pub fn gold_set(frame: &SemanticFrame, world: &WorldState) -> Result<Vec<ActionSequence>, PlanError> {
    let mut golds: Vec<ActionSequence> = Vec::with_capacity(2);
    for convention in Convention::ALL {
        let seq = plan(frame, world, convention)?;
        check_sequence(frame, world, &seq)
            .map_err(|fault| PlanError::Unverified { convention, reason: fault.to_string() })?;
        if !golds.contains(&seq) {
            golds.push(seq);
        }
    }
    Ok(golds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{Color, Shape};
    use crate::world::{ObjectSpec, Pose};

    fn world(agent: Pose, target: Cell, obj: ObjectSpec, d: usize) -> WorldState {
        WorldState::empty(d, agent).with_object(target, obj).with_target(target)
    }

    fn circle() -> ObjectSpec {
        ObjectSpec::new(Shape::Circle, Color::Red, 1)
    }

    #[test]
    fn straight_walk() {
        let w = world(Pose::new(1, 1, Heading::East), Cell::new(1, 3), circle(), 6);
        let f = SemanticFrame::new(Verb::Walk, Shape::Circle);
        assert_eq!(plan(&f, &w, Convention::HorizontalFirst).unwrap().to_string(), "walk walk");
        assert_eq!(gold_set(&f, &w).unwrap().len(), 1);
    }

    #[test]
    fn south_west_turn_counts() {
        let w = world(Pose::new(1, 4, Heading::East), Cell::new(4, 1), circle(), 6);
        let f = SemanticFrame::new(Verb::Walk, Shape::Circle);
        let hf = plan(&f, &w, Convention::HorizontalFirst).unwrap();
        assert_eq!((hf.count(Action::LTurn), hf.count(Action::RTurn)), (3, 0));
        let vf = plan(&f, &w, Convention::VerticalFirst).unwrap();
        assert_eq!((vf.count(Action::LTurn), vf.count(Action::RTurn)), (0, 2));
        assert_eq!(hf.count(Action::Walk), vf.count(Action::Walk));
        assert_eq!(gold_set(&f, &w).unwrap(), vec![hf, vf]);
    }

    #[test]
    fn heavy_push_two_cells() {
        let sq = ObjectSpec::new(Shape::Square, Color::Blue, 3);
        let w = world(Pose::new(2, 0, Heading::East), Cell::new(2, 3), sq, 6);
        let f = SemanticFrame::new(Verb::Push, Shape::Square);
        let route = plan_route(&f, &w, Convention::HorizontalFirst).unwrap();
        let i = route.interaction.unwrap();
        assert_eq!((i.direction, i.cells, i.tokens_per_cell), (Heading::East, 2, 2));
        assert_eq!(
            plan(&f, &w, Convention::HorizontalFirst).unwrap().to_string(),
            "walk walk walk push push push push"
        );
    }

    #[test]
    fn pull_drags_back_along_approach() {
        let w = world(Pose::new(0, 0, Heading::East), Cell::new(0, 2), circle(), 4);
        let f = SemanticFrame::new(Verb::Pull, Shape::Circle);
        assert_eq!(plan(&f, &w, Convention::HorizontalFirst).unwrap().to_string(), "walk walk pull pull");
    }

    #[test]
    fn adverb_decorations() {
        let one = MarkedPlan(vec![PlanItem::Move(vec![Action::Walk])]);
        assert_eq!(
            apply_adverb(&one, Some(Adverb::Cautiously)).to_string(),
            "L_turn R_turn R_turn L_turn walk"
        );
        assert_eq!(apply_adverb(&one, Some(Adverb::Hesitantly)).to_string(), "walk stay");
        let two = MarkedPlan(vec![PlanItem::Move(vec![Action::Walk]), PlanItem::Move(vec![Action::Walk])]);
        assert_eq!(
            apply_adverb(&two, Some(Adverb::WhileSpinning)).to_string(),
            "L_turn L_turn L_turn L_turn walk L_turn L_turn L_turn L_turn walk"
        );
        assert_eq!(apply_adverb(&two, Some(Adverb::WhileZigzagging)), apply_adverb(&two, None));
    }

    #[test]
    fn zigzag_gold_set_has_both_starts() {
        let w = world(Pose::new(0, 0, Heading::East), Cell::new(2, 3), circle(), 6);
        let f = SemanticFrame::new(Verb::Walk, Shape::Circle).with_adverb(Adverb::WhileZigzagging);
        let golds = gold_set(&f, &w).unwrap();
        assert_eq!(golds.len(), 2);
        assert_eq!(golds[0].to_string(), "walk R_turn walk L_turn walk R_turn walk L_turn walk");
        assert_eq!(golds[1].to_string(), "R_turn walk L_turn walk R_turn walk L_turn walk walk");
    }

    #[test]
    fn wrong_target_is_a_planning_error() {
        let w = world(Pose::new(0, 0, Heading::East), Cell::new(2, 3), circle(), 6);
        let f = SemanticFrame::new(Verb::Walk, Shape::Square);
        assert!(matches!(plan(&f, &w, Convention::HorizontalFirst), Err(PlanError::InvalidWorld(_))));
    }

    #[test]
    fn rotations() {
        assert_eq!(rotation(Heading::East, Heading::West), vec![Action::LTurn, Action::LTurn]);
        assert_eq!(rotation(Heading::East, Heading::South), vec![Action::RTurn]);
        assert_eq!(rotation(Heading::East, Heading::North), vec![Action::LTurn]);
        assert!(rotation(Heading::South, Heading::South).is_empty());
    }
}
