//! One-hot `d x d x 16` state encoding.
//!
//! Channel layout per cell:
//!
//! | channels | meaning                                 |
//! |----------|-----------------------------------------|
//! | 0..4     | object size 1, 2, 3, 4                  |
//! | 4..8     | object color red, green, blue, yellow   |
//! | 8..11    | object shape circle, square, cylinder   |
//! | 11       | agent present                           |
//! | 12..16   | agent heading east, south, west, north  |

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Cell, Heading, ObjectSpec, Pose, WorldState};
use crate::attributes::{Color, ObjectSize, Shape};

const SIZE_BASE: usize = 0;
const COLOR_BASE: usize = 4;
const SHAPE_BASE: usize = 8;
const AGENT: usize = 11;
const HEADING_BASE: usize = 12;

/// `5 + |colors| + |shapes| + |sizes|`.
pub const CHANNELS: usize = 5 + Color::ALL.len() + Shape::ALL.len() + (ObjectSize::MAX as usize);

const HEADING_ORDER: [Heading; 4] = [Heading::East, Heading::South, Heading::West, Heading::North];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTensor {
    grid_size: usize,
    values: Vec<u8>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("expected exactly one agent cell, found {0}")]
    AgentCount(usize),
    #[error("cell {cell}: {group} channels are not one-hot")]
    NotOneHot { cell: Cell, group: &'static str },
    #[error("cell {0}: partial object encoding")]
    PartialObject(Cell),
    #[error("tensor holds values other than 0 and 1")]
    NotBinary,
}

impl StateTensor {
    pub fn zeros(grid_size: usize) -> Self {
        StateTensor { grid_size, values: vec![0; grid_size * grid_size * CHANNELS] }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.grid_size, self.grid_size, CHANNELS]
    }

    fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.grid_size + col) * CHANNELS + channel
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.values[self.index(row, col, channel)]
    }

    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: u8) {
        let i = self.index(row, col, channel);
        self.values[i] = value;
    }

    /// Row-major `[row][col][channel]` values.
    pub fn as_slice(&self) -> &[u8] {
        &self.values
    }

    pub fn cell_channels(&self, row: usize, col: usize) -> &[u8] {
        let start = self.index(row, col, 0);
        &self.values[start..start + CHANNELS]
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0).count()
    }

    /// Inverse of [`encode_state`]. The designated target is not part of the
    /// encoding and is supplied by the caller.
    pub fn decode(&self, target_cell: Cell) -> Result<WorldState, DecodeError> {
        if self.values.iter().any(|v| *v > 1) {
            return Err(DecodeError::NotBinary);
        }
        let mut agent = None;
        let mut agents = 0;
        let mut objects = BTreeMap::new();
        for row in 0..self.grid_size {
            for col in 0..self.grid_size {
                let cell = Cell::new(row, col);
                let ch = self.cell_channels(row, col);
                let size = one_hot(&ch[SIZE_BASE..COLOR_BASE], cell, "size")?;
                let color = one_hot(&ch[COLOR_BASE..SHAPE_BASE], cell, "color")?;
                let shape = one_hot(&ch[SHAPE_BASE..AGENT], cell, "shape")?;
                match (size, color, shape) {
                    (Some(s), Some(c), Some(sh)) => {
                        objects.insert(
                            cell,
                            ObjectSpec {
                                shape: Shape::ALL[sh],
                                color: Color::ALL[c],
                                size: ObjectSize::new(s as u8 + 1).expect("size channel in range"),
                            },
                        );
                    }
                    (None, None, None) => {}
                    _ => return Err(DecodeError::PartialObject(cell)),
                }
                let heading = one_hot(&ch[HEADING_BASE..CHANNELS], cell, "heading")?;
                match (ch[AGENT], heading) {
                    (1, Some(h)) => {
                        agents += 1;
                        agent = Some(Pose::new(row, col, HEADING_ORDER[h]));
                    }
                    (0, None) => {}
                    _ => return Err(DecodeError::NotOneHot { cell, group: "agent" }),
                }
            }
        }
        match (agents, agent) {
            (1, Some(agent)) => Ok(WorldState { grid_size: self.grid_size, agent, objects, target_cell }),
            _ => Err(DecodeError::AgentCount(agents)),
        }
    }
}

/// `Ok(None)` for an all-zero group, `Ok(Some(i))` for a one-hot group.
fn one_hot(group: &[u8], cell: Cell, name: &'static str) -> Result<Option<usize>, DecodeError> {
    let mut hot = group.iter().enumerate().filter(|(_, v)| **v == 1).map(|(i, _)| i);
    match (hot.next(), hot.next()) {
        (None, _) => Ok(None),
        (Some(i), None) => Ok(Some(i)),
        _ => Err(DecodeError::NotOneHot { cell, group: name }),
    }
}

pub fn encode_state(world: &WorldState) -> StateTensor {
    let mut t = StateTensor::zeros(world.grid_size);
    for (cell, obj) in &world.objects {
        t.set(cell.row, cell.col, SIZE_BASE + obj.size.get() as usize - 1, 1);
        t.set(cell.row, cell.col, COLOR_BASE + obj.color.index(), 1);
        t.set(cell.row, cell.col, SHAPE_BASE + obj.shape.index(), 1);
    }
    let a = world.agent;
    t.set(a.row, a.col, AGENT, 1);
    let h = HEADING_ORDER.iter().position(|h| *h == a.heading).expect("heading listed");
    t.set(a.row, a.col, HEADING_BASE + h, 1);
    t
}
