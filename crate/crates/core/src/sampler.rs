//! World-state sampling under referent uniqueness and size-distractor constraints.
//!
//! Three recipes depending on what the referent mentions:
//!
//! 1. shape only: one random object of every other shape; half are placed.
//! 2. color and shape: one random-size object of every other color/shape
//!    pair; half are placed.
//! 3. a size word: two objects per color/shape pair, with every object that
//!    could compete for the referent sized on the far side of the target;
//!    half of the pairs (counting the target's own pair) are placed.
//!
//! "Half" of `n` is `max(1, n / 2)` rounded down.

use std::fmt;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::{Color, ObjectSize, Shape};
use crate::grammar::{SemanticFrame, SizeWord};
use crate::world::{resolve_referent, Cell, Heading, ObjectSpec, Pose, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeDirection {
    North,
    NorthEast,
    East,
    SouthEast,
    South,
    SouthWest,
    West,
    NorthWest,
}

impl RelativeDirection {
    pub const ALL: [RelativeDirection; 8] = [
        RelativeDirection::North,
        RelativeDirection::NorthEast,
        RelativeDirection::East,
        RelativeDirection::SouthEast,
        RelativeDirection::South,
        RelativeDirection::SouthWest,
        RelativeDirection::West,
        RelativeDirection::NorthWest,
    ];

    /// Signs of the (row, col) offset from agent to target.
    pub fn signs(self) -> (isize, isize) {
        use RelativeDirection::*;
        match self {
            North => (-1, 0),
            NorthEast => (-1, 1),
            East => (0, 1),
            SouthEast => (1, 1),
            South => (1, 0),
            SouthWest => (1, -1),
            West => (0, -1),
            NorthWest => (-1, -1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        let (r, c) = self.signs();
        r != 0 && c != 0
    }

    pub fn from_offset(dr: isize, dc: isize) -> Option<Self> {
        let signs = (dr.signum(), dc.signum());
        Self::ALL.into_iter().find(|d| d.signs() == signs)
    }

    pub fn as_str(self) -> &'static str {
        use RelativeDirection::*;
        match self {
            North => "north",
            NorthEast => "north_east",
            East => "east",
            SouthEast => "south_east",
            South => "south",
            SouthWest => "south_west",
            West => "west",
            NorthWest => "north_west",
        }
    }
}

impl fmt::Display for RelativeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative direction and Manhattan distance from agent to target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SituationSlot {
    pub direction: RelativeDirection,
    pub distance: usize,
}

/// All feasible slots for a `grid_size` grid: distances `1..=d-1` for straight
/// directions and `2..=2(d-1)` for diagonal ones.
pub fn enumerate_slots(grid_size: usize) -> Vec<SituationSlot> {
    let max_axis = grid_size.saturating_sub(1);
    RelativeDirection::ALL
        .into_iter()
        .flat_map(|direction| {
            let range = if direction.is_diagonal() { 2..=2 * max_axis } else { 1..=max_axis };
            range.map(move |distance| SituationSlot { direction, distance })
        })
        .collect()
}

/// Colors and shapes objects may take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectUniverse {
    pub colors: Vec<Color>,
    pub shapes: Vec<Shape>,
}

impl Default for ObjectUniverse {
    fn default() -> Self {
        ObjectUniverse { colors: Color::ALL.to_vec(), shapes: Shape::ALL.to_vec() }
    }
}

/// Every object the referent could designate as a contrastable target.
pub fn candidate_targets(frame: &SemanticFrame, universe: &ObjectUniverse) -> Vec<ObjectSpec> {
    let colors: Vec<Color> = match frame.color {
        Some(c) => vec![c],
        None => universe.colors.clone(),
    };
    let sizes: Vec<ObjectSize> = ObjectSize::all()
        .filter(|s| match frame.size {
            Some(SizeWord::Small) => s.get() < ObjectSize::MAX,
            Some(SizeWord::Big) => s.get() > ObjectSize::MIN,
            None => true,
        })
        .collect();
    colors
        .iter()
        .flat_map(|&color| sizes.iter().map(move |&size| ObjectSpec { shape: frame.shape, color, size }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecipe {
    pub target: ObjectSpec,
    /// Distractors that must be placed (the size contrast).
    pub mandatory: Vec<ObjectSpec>,
    /// Candidate groups (singletons or size-contrasting pairs) to draw from.
    pub optional_pool: Vec<Vec<ObjectSpec>>,
    /// Number of groups drawn from `optional_pool`.
    pub select: usize,
}

impl GenerationRecipe {
    pub fn object_count(&self) -> usize {
        let per_group = self.optional_pool.first().map_or(0, Vec::len);
        1 + self.mandatory.len() + self.select * per_group
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecipeError {
    #[error("target {target} does not match the referent")]
    TargetMismatch { target: ObjectSpec },
    #[error("no size on the far side of target size {0} for the size word")]
    NoContrast(ObjectSize),
}

fn half(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        (n / 2).max(1)
    }
}

/// Sizes a competing object may take so the target stays the referent.
fn contrast_sizes(word: SizeWord, target: ObjectSize) -> Vec<ObjectSize> {
    ObjectSize::all()
        .filter(|s| match word {
            SizeWord::Small => *s > target,
            SizeWord::Big => *s < target,
        })
        .collect()
}

fn two_sizes<R: Rng + ?Sized>(allowed: &[ObjectSize], rng: &mut R) -> [ObjectSize; 2] {
    if allowed.len() >= 2 {
        let picked: Vec<_> = allowed.choose_multiple(rng, 2).copied().collect();
        [picked[0], picked[1]]
    } else {
        [allowed[0], allowed[0]]
    }
}

fn random_size<R: Rng + ?Sized>(rng: &mut R) -> ObjectSize {
    ObjectSize::new(rng.gen_range(ObjectSize::MIN..=ObjectSize::MAX)).expect("in range")
}

pub fn build_recipe<R: Rng + ?Sized>(
    frame: &SemanticFrame,
    target: ObjectSpec,
    universe: &ObjectUniverse,
    rng: &mut R,
) -> Result<GenerationRecipe, RecipeError> {
    if target.shape != frame.shape || frame.color.is_some_and(|c| c != target.color) {
        return Err(RecipeError::TargetMismatch { target });
    }
    let all_sizes: Vec<ObjectSize> = ObjectSize::all().collect();

    let Some(word) = frame.size else {
        let pool: Vec<Vec<ObjectSpec>> = match frame.color {
            None => universe
                .shapes
                .iter()
                .filter(|s| **s != target.shape)
                .map(|&shape| {
                    let color = *universe.colors.choose(rng).unwrap_or(&target.color);
                    vec![ObjectSpec { shape, color, size: random_size(rng) }]
                })
                .collect(),
            Some(_) => universe
                .colors
                .iter()
                .flat_map(|&c| universe.shapes.iter().map(move |&s| (c, s)))
                .filter(|&(c, s)| (c, s) != (target.color, target.shape))
                .map(|(color, shape)| vec![ObjectSpec { shape, color, size: random_size(rng) }])
                .collect(),
        };
        let select = half(pool.len());
        return Ok(GenerationRecipe { target, mandatory: Vec::new(), optional_pool: pool, select });
    };

    let contrast = contrast_sizes(word, target.size);
    if contrast.is_empty() {
        return Err(RecipeError::NoContrast(target.size));
    }
    let competes = |o_color: Color, o_shape: Shape| {
        o_shape == target.shape && frame.color.is_none_or(|c| c == o_color)
    };
    let mandatory = vec![ObjectSpec { size: *contrast.choose(rng).expect("non-empty"), ..target }];
    let mut pool = Vec::new();
    let pairs: Vec<(Color, Shape)> = universe
        .colors
        .iter()
        .flat_map(|&c| universe.shapes.iter().map(move |&s| (c, s)))
        .collect();
    for &(color, shape) in &pairs {
        if (color, shape) == (target.color, target.shape) {
            continue;
        }
        let allowed = if competes(color, shape) { &contrast } else { &all_sizes };
        let [a, b] = two_sizes(allowed, rng);
        pool.push(vec![ObjectSpec { shape, color, size: a }, ObjectSpec { shape, color, size: b }]);
    }
    let select = half(pairs.len()).saturating_sub(1);
    Ok(GenerationRecipe { target, mandatory, optional_pool: pool, select })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingPolicy {
    #[default]
    East,
    Random,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("slot {direction} at distance {distance} does not fit a {grid_size}x{grid_size} grid")]
    InfeasibleSlot { direction: RelativeDirection, distance: usize, grid_size: usize },
    #[error("could not place {needed} objects on {free} free cells")]
    NoRoom { needed: usize, free: usize },
    #[error("no valid placement after {0} attempts")]
    RetriesExhausted(usize),
}

/// Draws a concrete (row, col) offset for a slot, or `None` if it cannot fit.
fn slot_offset<R: Rng + ?Sized>(slot: SituationSlot, grid_size: usize, rng: &mut R) -> Option<(isize, isize)> {
    let max_axis = grid_size.checked_sub(1)?;
    let (sr, sc) = slot.direction.signs();
    let n = slot.distance;
    let (rows, cols) = if slot.direction.is_diagonal() {
        let lo = n.saturating_sub(max_axis).max(1);
        let hi = max_axis.min(n.checked_sub(1)?);
        if lo > hi {
            return None;
        }
        let a = rng.gen_range(lo..=hi);
        (a, n - a)
    } else if sr != 0 {
        (n, 0)
    } else {
        (0, n)
    };
    if rows > max_axis || cols > max_axis || n == 0 {
        return None;
    }
    Some((sr * rows as isize, sc * cols as isize))
}

pub fn sample_world<R: Rng + ?Sized>(
    frame: &SemanticFrame,
    slot: SituationSlot,
    recipe: &GenerationRecipe,
    grid_size: usize,
    heading: HeadingPolicy,
    max_retries: usize,
    rng: &mut R,
) -> Result<WorldState, SampleError> {
    let infeasible = SampleError::InfeasibleSlot { direction: slot.direction, distance: slot.distance, grid_size };
    let needed = recipe.object_count() - 1;
    let free = (grid_size * grid_size).saturating_sub(2);
    if needed > free {
        return Err(SampleError::NoRoom { needed, free });
    }
    for _ in 0..max_retries.max(1) {
        let (dr, dc) = slot_offset(slot, grid_size, rng).ok_or_else(|| infeasible.clone())?;
        let d = grid_size as isize;
        let row = rng.gen_range((-dr).max(0)..d - dr.max(0)) as usize;
        let col = rng.gen_range((-dc).max(0)..d - dc.max(0)) as usize;
        let agent_cell = Cell::new(row, col);
        let target_cell = Cell::new((row as isize + dr) as usize, (col as isize + dc) as usize);
        let agent_heading = match heading {
            HeadingPolicy::East => Heading::East,
            HeadingPolicy::Random => *Heading::ALL.choose(rng).expect("non-empty"),
        };

        let mut objects: Vec<ObjectSpec> = recipe.mandatory.clone();
        for group in recipe.optional_pool.choose_multiple(rng, recipe.select) {
            objects.extend(group.iter().copied());
        }
        let mut cells: Vec<Cell> = (0..grid_size)
            .flat_map(|r| (0..grid_size).map(move |c| Cell::new(r, c)))
            .filter(|c| *c != agent_cell && *c != target_cell)
            .choose_multiple(rng, objects.len());
        cells.shuffle(rng);
        let mut world = WorldState::empty(grid_size, Pose::new(row, col, agent_heading))
            .with_object(target_cell, recipe.target)
            .with_target(target_cell);
        world.objects.extend(cells.into_iter().zip(objects));
        if validate_world(frame, &world) {
            return Ok(world);
        }
    }
    Err(SampleError::RetriesExhausted(max_retries))
}

/// True iff the referent resolves to exactly one object and that object is the designated target.
pub fn validate_world(frame: &SemanticFrame, world: &WorldState) -> bool {
    world.check().is_ok() && resolve_referent(frame, world) == Ok(world.target_cell)
}

/// For size-modified referents: a competing object on the far side of the target's size exists.
pub fn has_size_contrast(frame: &SemanticFrame, world: &WorldState) -> bool {
    let Some(word) = frame.size else { return true };
    let Some(target) = world.target() else { return false };
    world.objects.iter().any(|(cell, o)| {
        *cell != world.target_cell
            && o.shape == target.shape
            && frame.color.is_none_or(|c| c == o.color)
            && match word {
                SizeWord::Small => o.size > target.size,
                SizeWord::Big => o.size < target.size,
            }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Verb;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    /// Independent count of slot distances by scanning every agent/target cell pair.
    fn brute_force_distances(d: usize, direction: RelativeDirection) -> Vec<usize> {
        let mut out = std::collections::BTreeSet::new();
        for ar in 0..d {
            for ac in 0..d {
                for tr in 0..d {
                    for tc in 0..d {
                        let (dr, dc) = (tr as isize - ar as isize, tc as isize - ac as isize);
                        if (dr, dc) != (0, 0) && RelativeDirection::from_offset(dr, dc) == Some(direction) {
                            out.insert((dr.abs() + dc.abs()) as usize);
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn slots_match_brute_force() {
        for d in [3, 4, 6] {
            let slots = enumerate_slots(d);
            for direction in RelativeDirection::ALL {
                let got: Vec<usize> =
                    slots.iter().filter(|s| s.direction == direction).map(|s| s.distance).collect();
                assert_eq!(got, brute_force_distances(d, direction), "d={d} {direction}");
            }
        }
        let six = enumerate_slots(6);
        let north: Vec<_> = six.iter().filter(|s| s.direction == RelativeDirection::North).map(|s| s.distance).collect();
        assert_eq!(north, vec![1, 2, 3, 4, 5]);
        let ne: Vec<_> = six.iter().filter(|s| s.direction == RelativeDirection::NorthEast).map(|s| s.distance).collect();
        assert_eq!(ne, (2..=10).collect::<Vec<_>>());
        let east3: Vec<_> =
            enumerate_slots(3).into_iter().filter(|s| s.direction == RelativeDirection::East).map(|s| s.distance).collect();
        assert_eq!(east3, vec![1, 2]);
    }

    #[test]
    fn shape_only_recipe() {
        let frame = SemanticFrame::new(Verb::Walk, Shape::Circle);
        let target = ObjectSpec::new(Shape::Circle, Color::Red, 2);
        let r = build_recipe(&frame, target, &ObjectUniverse::default(), &mut rng()).unwrap();
        assert_eq!(r.optional_pool.len(), 2);
        assert!(r.optional_pool.iter().all(|g| g.len() == 1 && g[0].shape != Shape::Circle));
        assert_eq!(r.select, 1);
        assert_eq!(r.object_count(), 2);
    }

    #[test]
    fn color_shape_recipe() {
        let frame = SemanticFrame::new(Verb::Walk, Shape::Circle).with_color(Color::Red);
        let r = build_recipe(&frame, ObjectSpec::new(Shape::Circle, Color::Red, 4), &ObjectUniverse::default(), &mut rng())
            .unwrap();
        // 4 colors x 3 shapes minus the target pair, enumerated independently.
        let expected = Color::ALL.len() * Shape::ALL.len() - 1;
        assert_eq!(r.optional_pool.len(), expected);
        assert_eq!(r.select, 5);
        assert_eq!(r.object_count(), 6);
    }

    #[test]
    fn size_recipe_has_larger_contrast() {
        let frame = SemanticFrame::new(Verb::Walk, Shape::Circle).with_size(SizeWord::Small);
        let target = ObjectSpec::new(Shape::Circle, Color::Green, 2);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = build_recipe(&frame, target, &ObjectUniverse::default(), &mut rng).unwrap();
            assert_eq!(r.mandatory.len(), 1);
            assert!(r.mandatory[0].shape == Shape::Circle && r.mandatory[0].size.get() >= 3);
            for g in &r.optional_pool {
                if g[0].shape == Shape::Circle {
                    assert!(g.iter().all(|o| o.size.get() >= 3));
                }
            }
            assert_eq!(r.object_count(), 12);
        }
        let big = SemanticFrame::new(Verb::Walk, Shape::Circle).with_size(SizeWord::Big);
        let err = build_recipe(&big, ObjectSpec::new(Shape::Circle, Color::Red, 1), &ObjectUniverse::default(), &mut rng());
        assert!(matches!(err, Err(RecipeError::NoContrast(_))));
    }

    #[test]
    fn candidate_target_counts() {
        let u = ObjectUniverse::default();
        let f = SemanticFrame::new(Verb::Walk, Shape::Square).with_color(Color::Yellow);
        assert_eq!(candidate_targets(&f, &u).len(), 4);
        assert_eq!(candidate_targets(&f.with_size(SizeWord::Small), &u).len(), 3);
        assert_eq!(candidate_targets(&SemanticFrame::new(Verb::Walk, Shape::Square), &u).len(), 16);
    }

    #[test]
    fn sampled_world_respects_slot() {
        let frame = SemanticFrame::new(Verb::Walk, Shape::Circle);
        let target = ObjectSpec::new(Shape::Circle, Color::Blue, 1);
        let mut rng = rng();
        let recipe = build_recipe(&frame, target, &ObjectUniverse::default(), &mut rng).unwrap();
        let slot = SituationSlot { direction: RelativeDirection::East, distance: 2 };
        for _ in 0..100 {
            let w = sample_world(&frame, slot, &recipe, 6, HeadingPolicy::East, 10, &mut rng).unwrap();
            assert_eq!(w.agent.cell().offset_to(w.target_cell), (0, 2));
            assert_eq!(w.agent.heading, Heading::East);
            assert!(!w.objects.contains_key(&w.agent.cell()));
            assert!(validate_world(&frame, &w));
        }
    }

    #[test]
    fn infeasible_slot_reported() {
        let frame = SemanticFrame::new(Verb::Walk, Shape::Circle);
        let recipe = build_recipe(&frame, ObjectSpec::new(Shape::Circle, Color::Blue, 1), &ObjectUniverse::default(), &mut rng())
            .unwrap();
        let slot = SituationSlot { direction: RelativeDirection::North, distance: 6 };
        assert!(matches!(
            sample_world(&frame, slot, &recipe, 6, HeadingPolicy::East, 10, &mut rng()),
            Err(SampleError::InfeasibleSlot { .. })
        ));
    }

    #[test]
    fn validate_world_cases() {
        let c = Cell::new(1, 1);
        let agent = Pose::new(0, 0, Heading::East);
        let one = WorldState::empty(6, agent).with_object(c, ObjectSpec::new(Shape::Circle, Color::Red, 1)).with_target(c);
        assert!(validate_world(&SemanticFrame::new(Verb::Walk, Shape::Circle), &one));

        let two = one.clone().with_object(c, ObjectSpec::new(Shape::Circle, Color::Red, 2))
            .with_object(Cell::new(3, 3), ObjectSpec::new(Shape::Circle, Color::Blue, 4));
        let small = SemanticFrame::new(Verb::Walk, Shape::Circle).with_size(SizeWord::Small);
        assert!(validate_world(&small, &two));
        assert!(has_size_contrast(&small, &two));

        let yellow = SemanticFrame::new(Verb::Walk, Shape::Square).with_color(Color::Yellow);
        let dup = WorldState::empty(6, agent)
            .with_object(c, ObjectSpec::new(Shape::Square, Color::Yellow, 2))
            .with_object(Cell::new(2, 2), ObjectSpec::new(Shape::Square, Color::Yellow, 2))
            .with_target(c);
        assert!(!validate_world(&yellow, &dup));
    }
}
