use std::collections::BTreeMap;

use thiserror::Error;

use super::{turn, Action, ActionSequence, Cell, Heading, ObjectSpec, Pose, WorldState};
use crate::attributes::WeightClass;

/// What a single token did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEffect {
    Turned,
    Stayed,
    Walked(Heading),
    /// First token of a heavy-object move; nothing has moved yet.
    HalfMove,
    /// The co-located object (and the agent) moved one cell.
    MovedObject { direction: Heading, tokens: usize },
}

impl StepEffect {
    pub fn moved(&self) -> bool {
        matches!(self, StepEffect::Walked(_) | StepEffect::MovedObject { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub action: Action,
    pub effect: StepEffect,
    pub agent: Pose,
    pub objects: BTreeMap<Cell, ObjectSpec>,
    pub target_cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub final_state: WorldState,
    pub trajectory: Vec<Step>,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ExecErrorKind {
    #[error("walked off the grid")]
    WalkOffGrid,
    #[error("no object at the agent's cell to {0}")]
    NoObject(Action),
    #[error("object would leave the grid")]
    ObjectOffGrid,
    #[error("object blocked by another object at {0}")]
    ObjectBlocked(Cell),
    #[error("heavy object left half-moved (odd number of push/pull tokens)")]
    HalfMove,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("execution failed at token {step}: {kind}")]
pub struct ExecError {
    /// Index of the failing token; equals the sequence length for errors at end of input.
    pub step: usize,
    pub kind: ExecErrorKind,
    /// State after the last token that executed cleanly.
    pub last_valid: Box<WorldState>,
}

/// Token-by-token interpreter over a world state.
#[derive(Debug, Clone)]
pub struct Executor {
    state: WorldState,
    pending: Option<Action>,
    steps: usize,
}

impl Executor {
    pub fn new(world: &WorldState) -> Self {
        Executor { state: world.clone(), pending: None, steps: 0 }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Applies one token. On error the state is left unchanged.
    pub fn step(&mut self, action: Action) -> Result<StepEffect, ExecErrorKind> {
        if let Some(pending) = self.pending {
            if pending != action {
                return Err(ExecErrorKind::HalfMove);
            }
        }
        let effect = match action {
            Action::LTurn | Action::RTurn => {
                self.state.agent.heading = turn(self.state.agent.heading, action);
                StepEffect::Turned
            }
            Action::Stay => StepEffect::Stayed,
            Action::Walk => {
                let heading = self.state.agent.heading;
                let next = self
                    .state
                    .agent
                    .cell()
                    .step(heading, self.state.grid_size)
                    .ok_or(ExecErrorKind::WalkOffGrid)?;
                self.state.agent.set_cell(next);
                StepEffect::Walked(heading)
            }
            Action::Push | Action::Pull => self.interact(action)?,
        };
        self.steps += 1;
        Ok(effect)
    }

    fn interact(&mut self, action: Action) -> Result<StepEffect, ExecErrorKind> {
        let here = self.state.agent.cell();
        let object = *self.state.objects.get(&here).ok_or(ExecErrorKind::NoObject(action))?;
        let direction = match action {
            Action::Push => self.state.agent.heading,
            _ => self.state.agent.heading.opposite(),
        };
        let dest = here.step(direction, self.state.grid_size).ok_or(ExecErrorKind::ObjectOffGrid)?;
        if self.state.objects.contains_key(&dest) {
            return Err(ExecErrorKind::ObjectBlocked(dest));
        }
        let tokens = object.weight_class().tokens_per_cell();
        if object.weight_class() == WeightClass::Heavy && self.pending.is_none() {
            self.pending = Some(action);
            return Ok(StepEffect::HalfMove);
        }
        self.pending = None;
        self.state.objects.remove(&here);
        self.state.objects.insert(dest, object);
        if self.state.target_cell == here {
            self.state.target_cell = dest;
        }
        self.state.agent.set_cell(dest);
        Ok(StepEffect::MovedObject { direction, tokens })
    }

    /// Ends execution, rejecting a dangling half move.
    pub fn finish(self) -> Result<WorldState, ExecErrorKind> {
        if self.pending.is_some() {
            return Err(ExecErrorKind::HalfMove);
        }
        Ok(self.state)
    }
}

/// Runs `actions` from `world`, recording the pose and object map after every token.
pub fn execute(world: &WorldState, actions: &ActionSequence) -> Result<Execution, ExecError> {
    let mut exec = Executor::new(world);
    let mut trajectory = Vec::with_capacity(actions.len());
    for (i, &action) in actions.actions().iter().enumerate() {
        match exec.step(action) {
            Ok(effect) => {
                let s = exec.state();
                trajectory.push(Step {
                    action,
                    effect,
                    agent: s.agent,
                    objects: s.objects.clone(),
                    target_cell: s.target_cell,
                });
            }
            Err(kind) => {
                return Err(ExecError { step: i, kind, last_valid: Box::new(exec.state().clone()) });
            }
        }
    }
    let last = exec.state().clone();
    match exec.finish() {
        Ok(final_state) => Ok(Execution { final_state, trajectory }),
        Err(kind) => Err(ExecError { step: actions.len(), kind, last_valid: Box::new(last) }),
    }
}

/// Runs `actions` without recording a trajectory.
pub(crate) fn run(world: &WorldState, actions: &[Action]) -> Result<(WorldState, Vec<StepEffect>), ExecErrorKind> {
    let mut exec = Executor::new(world);
    let effects = actions.iter().map(|&a| exec.step(a)).collect::<Result<Vec<_>, _>>()?;
    Ok((exec.finish()?, effects))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{Color, Shape};

    fn seq(s: &str) -> ActionSequence {
        s.parse().unwrap()
    }

    #[test]
    fn two_walks_east() {
        let w = WorldState::empty(6, Pose::new(1, 0, Heading::East));
        let out = execute(&w, &seq("walk walk")).unwrap();
        assert_eq!(out.final_state.agent.cell(), Cell::new(1, 2));
        assert_eq!(out.trajectory.len(), 2);
    }

    #[test]
    fn heavy_square_needs_two_pushes_per_cell() {
        // Square of size 3 at (2, 4) with one free cell before the east wall.
        let start = Cell::new(2, 4);
        let w = WorldState::empty(6, Pose::new(2, 4, Heading::East))
            .with_object(start, ObjectSpec::new(Shape::Square, Color::Blue, 3))
            .with_target(start);
        let out = execute(&w, &seq("push push")).unwrap();
        assert_eq!(out.final_state.target_cell, Cell::new(2, 5));
        assert_eq!(out.final_state.agent.cell(), Cell::new(2, 5));
        assert_eq!(out.trajectory[0].effect, StepEffect::HalfMove);
        assert_eq!(out.trajectory[0].target_cell, start);

        let err = execute(&w, &seq("push")).unwrap_err();
        assert_eq!((err.kind, err.step), (ExecErrorKind::HalfMove, 1));
        let err = execute(&w, &seq("push walk")).unwrap_err();
        assert_eq!((err.kind, err.step), (ExecErrorKind::HalfMove, 1));
        let err = execute(&w, &seq("push push push")).unwrap_err();
        assert_eq!(err.kind, ExecErrorKind::ObjectOffGrid);
    }

    #[test]
    fn light_pull_moves_backwards() {
        let start = Cell::new(2, 2);
        let w = WorldState::empty(6, Pose::new(2, 2, Heading::East))
            .with_object(start, ObjectSpec::new(Shape::Circle, Color::Red, 1))
            .with_target(start);
        let out = execute(&w, &seq("pull pull")).unwrap();
        assert_eq!(out.final_state.target_cell, Cell::new(2, 0));
        assert_eq!(out.final_state.agent, Pose::new(2, 0, Heading::East));
    }

    #[test]
    fn errors() {
        let w = WorldState::empty(3, Pose::new(0, 0, Heading::North));
        let err = execute(&w, &seq("walk")).unwrap_err();
        assert_eq!(err.kind, ExecErrorKind::WalkOffGrid);
        assert_eq!(err.last_valid.agent, w.agent);
        let err = execute(&w, &seq("push")).unwrap_err();
        assert_eq!(err.kind, ExecErrorKind::NoObject(Action::Push));

        let w = WorldState::empty(3, Pose::new(0, 0, Heading::East))
            .with_object(Cell::new(0, 0), ObjectSpec::new(Shape::Circle, Color::Red, 1))
            .with_object(Cell::new(0, 1), ObjectSpec::new(Shape::Square, Color::Red, 1));
        let err = execute(&w, &seq("push")).unwrap_err();
        assert_eq!(err.kind, ExecErrorKind::ObjectBlocked(Cell::new(0, 1)));
    }

    #[test]
    fn walking_through_objects_is_allowed() {
        let w = WorldState::empty(4, Pose::new(0, 0, Heading::East))
            .with_object(Cell::new(0, 1), ObjectSpec::new(Shape::Cylinder, Color::Green, 4));
        let out = execute(&w, &seq("walk walk stay")).unwrap();
        assert_eq!(out.final_state.agent.cell(), Cell::new(0, 2));
        assert_eq!(out.final_state.objects, w.objects);
    }
}
