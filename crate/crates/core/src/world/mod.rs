//! Grid-world data model and the independent execution oracle.
//!
//! Row 0 is the north edge and column 0 the west edge, so "south" increases
//! the row and "west" decreases the column.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::{Color, ObjectSize, Shape, WeightClass};

mod check;
mod exec;
mod tensor;

pub use check::{
    check_sequence, goal_satisfied, manner_satisfied, manner_satisfied_events, movement_events,
    resolve_referent, MovementEvent, ResolveError, SequenceFault,
};
pub use exec::{execute, ExecError, ExecErrorKind, Execution, Executor, Step, StepEffect};
pub use tensor::{encode_state, DecodeError, StateTensor, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    /// 90 degrees counterclockwise.
    pub fn left(self) -> Heading {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    /// 90 degrees clockwise.
    pub fn right(self) -> Heading {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    pub fn opposite(self) -> Heading {
        self.left().left()
    }

    /// (row, col) unit offset.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (-1, 0),
            Heading::East => (0, 1),
            Heading::South => (1, 0),
            Heading::West => (0, -1),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Heading::East | Heading::West)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Heading::North => "north",
            Heading::East => "east",
            Heading::South => "south",
            Heading::West => "west",
        }
    }
}

/// Applies a turn token to a heading. Non-turn actions leave it unchanged.
pub fn turn(heading: Heading, action: Action) -> Heading {
    match action {
        Action::LTurn => heading.left(),
        Action::RTurn => heading.right(),
        _ => heading,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Neighbouring cell in `heading`, if it lies inside a `grid_size` grid.
    pub fn step(self, heading: Heading, grid_size: usize) -> Option<Cell> {
        let (dr, dc) = heading.delta();
        let row = self.row.checked_add_signed(dr)?;
        let col = self.col.checked_add_signed(dc)?;
        (row < grid_size && col < grid_size).then_some(Cell { row, col })
    }

    /// Signed (row, col) offset from `self` to `other`.
    pub fn offset_to(self, other: Cell) -> (isize, isize) {
        (other.row as isize - self.row as isize, other.col as isize - self.col as isize)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub row: usize,
    pub col: usize,
    pub heading: Heading,
}

impl Pose {
    pub fn new(row: usize, col: usize, heading: Heading) -> Self {
        Pose { row, col, heading }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.row, self.col)
    }

    pub fn set_cell(&mut self, cell: Cell) {
        self.row = cell.row;
        self.col = cell.col;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub color: Color,
    pub size: ObjectSize,
}

impl ObjectSpec {
    pub fn new(shape: Shape, color: Color, size: u8) -> Self {
        ObjectSpec { shape, color, size: ObjectSize::new(size).expect("object size in 1..=4") }
    }

    pub fn weight_class(&self) -> WeightClass {
        self.size.weight_class()
    }
}

impl fmt::Display for ObjectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} (size {})", self.color, self.shape, self.size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WorldRecord", into = "WorldRecord")]
pub struct WorldState {
    pub grid_size: usize,
    pub agent: Pose,
    pub objects: BTreeMap<Cell, ObjectSpec>,
    /// Cell of the designated target object. Tracks the object when it is pushed or pulled.
    pub target_cell: Cell,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("grid size must be positive")]
    EmptyGrid,
    #[error("agent at {0} lies outside the grid")]
    AgentOutOfBounds(Cell),
    #[error("object at {0} lies outside the grid")]
    ObjectOutOfBounds(Cell),
    #[error("target cell {0} holds no object")]
    TargetNotOccupied(Cell),
    #[error("two objects share cell {0}")]
    SharedCell(Cell),
}

impl WorldState {
    /// World with no objects; the target cell defaults to the agent's cell.
    pub fn empty(grid_size: usize, agent: Pose) -> Self {
        WorldState { grid_size, agent, objects: BTreeMap::new(), target_cell: agent.cell() }
    }

    pub fn with_object(mut self, cell: Cell, object: ObjectSpec) -> Self {
        self.objects.insert(cell, object);
        self
    }

    pub fn with_target(mut self, cell: Cell) -> Self {
        self.target_cell = cell;
        self
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.grid_size && cell.col < self.grid_size
    }

    pub fn target(&self) -> Option<&ObjectSpec> {
        self.objects.get(&self.target_cell)
    }

    /// Checks bounds and target occupancy. One object per cell holds by construction of the map.
    pub fn check(&self) -> Result<(), WorldError> {
        if self.grid_size == 0 {
            return Err(WorldError::EmptyGrid);
        }
        if !self.in_bounds(self.agent.cell()) {
            return Err(WorldError::AgentOutOfBounds(self.agent.cell()));
        }
        if let Some(&cell) = self.objects.keys().find(|c| !self.in_bounds(**c)) {
            return Err(WorldError::ObjectOutOfBounds(cell));
        }
        if !self.objects.contains_key(&self.target_cell) {
            return Err(WorldError::TargetNotOccupied(self.target_cell));
        }
        Ok(())
    }
}

/// Serialized form of a world: objects as a row-major list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldRecord {
    grid_size: usize,
    agent: Pose,
    objects: Vec<PlacedObject>,
    target_cell: Cell,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacedObject {
    row: usize,
    col: usize,
    shape: Shape,
    color: Color,
    size: ObjectSize,
}

impl From<WorldState> for WorldRecord {
    fn from(w: WorldState) -> Self {
        let objects = w
            .objects
            .iter()
            .map(|(c, o)| PlacedObject { row: c.row, col: c.col, shape: o.shape, color: o.color, size: o.size })
            .collect();
        WorldRecord { grid_size: w.grid_size, agent: w.agent, objects, target_cell: w.target_cell }
    }
}

impl TryFrom<WorldRecord> for WorldState {
    type Error = WorldError;

    fn try_from(r: WorldRecord) -> Result<Self, WorldError> {
        let mut objects = BTreeMap::new();
        for o in r.objects {
            let cell = Cell::new(o.row, o.col);
            if objects.insert(cell, ObjectSpec { shape: o.shape, color: o.color, size: o.size }).is_some() {
                return Err(WorldError::SharedCell(cell));
            }
        }
        let world = WorldState { grid_size: r.grid_size, agent: r.agent, objects, target_cell: r.target_cell };
        world.check()?;
        Ok(world)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "walk")]
    Walk,
    #[serde(rename = "push")]
    Push,
    #[serde(rename = "pull")]
    Pull,
    #[serde(rename = "stay")]
    Stay,
    #[serde(rename = "L_turn")]
    LTurn,
    #[serde(rename = "R_turn")]
    RTurn,
}

impl Action {
    pub const ALL: [Action; 6] =
        [Action::Walk, Action::Push, Action::Pull, Action::Stay, Action::LTurn, Action::RTurn];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Walk => "walk",
            Action::Push => "push",
            Action::Pull => "pull",
            Action::Stay => "stay",
            Action::LTurn => "L_turn",
            Action::RTurn => "R_turn",
        }
    }

    pub fn is_turn(self) -> bool {
        matches!(self, Action::LTurn | Action::RTurn)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown action token {0:?}")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAction(s.to_owned()))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSequence(pub Vec<Action>);

impl ActionSequence {
    pub fn new() -> Self {
        ActionSequence(Vec::new())
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, action: Action) -> usize {
        self.0.iter().filter(|a| **a == action).count()
    }
}

impl FromStr for ActionSequence {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace().map(str::parse).collect::<Result<_, _>>().map(ActionSequence)
    }
}

impl fmt::Display for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(a.as_str())?;
        }
        Ok(())
    }
}

impl FromIterator<Action> for ActionSequence {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        ActionSequence(iter.into_iter().collect())
    }
}
