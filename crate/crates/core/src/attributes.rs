//! Object attribute vocabularies shared by the grammar and the world model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Blue, Color::Yellow];

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Circle,
    Square,
    Cylinder,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Circle, Shape::Square, Shape::Cylinder];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Cylinder => "cylinder",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Color {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Color::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

impl FromStr for Shape {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Shape::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Latent weight category deciding how many push/pull tokens move an object one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightClass {
    Light,
    Heavy,
}

impl WeightClass {
    /// Push or pull tokens consumed per cell moved.
    pub fn tokens_per_cell(self) -> usize {
        match self {
            WeightClass::Light => 1,
            WeightClass::Heavy => 2,
        }
    }
}

/// Object size in `1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ObjectSize(u8);

impl ObjectSize {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 4;

    pub fn new(value: u8) -> Option<Self> {
        (Self::MIN..=Self::MAX).contains(&value).then_some(ObjectSize(value))
    }

    pub fn all() -> impl Iterator<Item = ObjectSize> {
        (Self::MIN..=Self::MAX).map(ObjectSize)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn weight_class(self) -> WeightClass {
        if self.0 <= 2 {
            WeightClass::Light
        } else {
            WeightClass::Heavy
        }
    }
}

impl TryFrom<u8> for ObjectSize {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        ObjectSize::new(value).ok_or_else(|| format!("object size {value} outside 1..=4"))
    }
}

impl From<ObjectSize> for u8 {
    fn from(size: ObjectSize) -> u8 {
        size.0
    }
}

impl fmt::Display for ObjectSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_class_split() {
        let classes: Vec<_> = ObjectSize::all().map(ObjectSize::weight_class).collect();
        assert_eq!(
            classes,
            vec![WeightClass::Light, WeightClass::Light, WeightClass::Heavy, WeightClass::Heavy]
        );
    }

    #[test]
    fn size_bounds() {
        assert!(ObjectSize::new(0).is_none());
        assert!(ObjectSize::new(5).is_none());
        assert_eq!(ObjectSize::new(3).map(ObjectSize::get), Some(3));
        assert!(serde_json::from_str::<ObjectSize>("7").is_err());
    }
}
