//! The command language: configuration, exhaustive enumeration, parsing and
//! surface realization.
//!
//! ```text
//! ROOT -> VP
//! VP   -> VP RB | VV_i 'to' DP | VV_t DP
//! DP   -> DET NP
//! NP   -> JJ NP | NN
//! ```
//!
//! The `JJ` recursion is bounded to at most one size word and one color word.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::{Color, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Walk,
    Push,
    Pull,
}

impl Verb {
    pub const ALL: [Verb; 3] = [Verb::Walk, Verb::Push, Verb::Pull];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Walk => "walk",
            Verb::Push => "push",
            Verb::Pull => "pull",
        }
    }

    pub fn is_transitive(self) -> bool {
        !matches!(self, Verb::Walk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adverb {
    Cautiously,
    Hesitantly,
    WhileSpinning,
    WhileZigzagging,
}

impl Adverb {
    pub const ALL: [Adverb; 4] = [
        Adverb::Cautiously,
        Adverb::Hesitantly,
        Adverb::WhileSpinning,
        Adverb::WhileZigzagging,
    ];

    /// Surface tokens; the two-word adverbs stay split.
    pub fn tokens(self) -> &'static [&'static str] {
        match self {
            Adverb::Cautiously => &["cautiously"],
            Adverb::Hesitantly => &["hesitantly"],
            Adverb::WhileSpinning => &["while", "spinning"],
            Adverb::WhileZigzagging => &["while", "zigzagging"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeWord {
    Small,
    Big,
}

impl SizeWord {
    pub const ALL: [SizeWord; 2] = [SizeWord::Small, SizeWord::Big];

    pub fn as_str(self) -> &'static str {
        match self {
            SizeWord::Small => "small",
            SizeWord::Big => "big",
        }
    }
}

/// Placement of the size word relative to the color word when both are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjectiveOrder {
    /// "small red circle"
    SizeFirst,
    /// "red small circle"
    ColorFirst,
}

/// Parsed meaning of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SemanticFrame {
    pub verb: Verb,
    pub adverb: Option<Adverb>,
    pub size: Option<SizeWord>,
    pub color: Option<Color>,
    pub shape: Shape,
}

impl SemanticFrame {
    pub fn new(verb: Verb, shape: Shape) -> Self {
        SemanticFrame { verb, adverb: None, size: None, color: None, shape }
    }

    pub fn with_adverb(mut self, adverb: Adverb) -> Self {
        self.adverb = Some(adverb);
        self
    }

    pub fn with_size(mut self, size: SizeWord) -> Self {
        self.size = Some(size);
        self
    }

    pub fn with_color(mut self, color: Color) -> Self {
        self.color = Some(color);
        self
    }
}

/// A command as a sequence of lowercase word tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommandTokens(pub Vec<String>);

impl CommandTokens {
    pub fn from_words(text: &str) -> Self {
        CommandTokens(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.iter().any(|t| t == word)
    }
}

impl fmt::Display for CommandTokens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrammarConfig {
    pub verbs: Vec<Verb>,
    pub adverbs: Vec<Adverb>,
    pub colors: Vec<Color>,
    pub sizes: Vec<SizeWord>,
    pub shapes: Vec<Shape>,
    pub determiner: String,
    pub adjective_orders: Vec<AdjectiveOrder>,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig {
            verbs: Verb::ALL.to_vec(),
            adverbs: Adverb::ALL.to_vec(),
            colors: Color::ALL.to_vec(),
            sizes: SizeWord::ALL.to_vec(),
            shapes: Shape::ALL.to_vec(),
            determiner: "the".to_owned(),
            adjective_orders: vec![AdjectiveOrder::SizeFirst, AdjectiveOrder::ColorFirst],
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarConfigError {
    #[error("grammar config enables no verbs")]
    NoVerbs,
    #[error("grammar config enables no shapes")]
    NoShapes,
    #[error("determiner must be 'a' or 'the', got {0:?}")]
    BadDeterminer(String),
    #[error("adjective_orders is empty but both sizes and colors are enabled")]
    NoAdjectiveOrder,
}

impl GrammarConfig {
    pub fn validate(&self) -> Result<(), GrammarConfigError> {
        if self.verbs.is_empty() {
            return Err(GrammarConfigError::NoVerbs);
        }
        if self.shapes.is_empty() {
            return Err(GrammarConfigError::NoShapes);
        }
        if !DETERMINERS.contains(&self.determiner.as_str()) {
            return Err(GrammarConfigError::BadDeterminer(self.determiner.clone()));
        }
        if self.adjective_orders.is_empty() && !self.sizes.is_empty() && !self.colors.is_empty() {
            return Err(GrammarConfigError::NoAdjectiveOrder);
        }
        Ok(())
    }
}

const DETERMINERS: [&str; 2] = ["a", "the"];

/// Every distinct command of the configured language, in lexicographic token order.
pub fn enumerate_commands(config: &GrammarConfig) -> Result<Vec<CommandTokens>, GrammarConfigError> {
    config.validate()?;
    let mut adverbs: Vec<Option<Adverb>> = vec![None];
    adverbs.extend(dedup(&config.adverbs).into_iter().map(Some));
    let sizes = dedup(&config.sizes);
    let colors = dedup(&config.colors);
    let orders = dedup(&config.adjective_orders);

    let mut out = Vec::new();
    for &verb in &dedup(&config.verbs) {
        for &adverb in &adverbs {
            for &shape in &dedup(&config.shapes) {
                let base = SemanticFrame { verb, adverb, size: None, color: None, shape };
                out.push(realize_with(&base, AdjectiveOrder::SizeFirst, &config.determiner));
                for &size in &sizes {
                    let f = SemanticFrame { size: Some(size), ..base };
                    out.push(realize_with(&f, AdjectiveOrder::SizeFirst, &config.determiner));
                }
                for &color in &colors {
                    let f = SemanticFrame { color: Some(color), ..base };
                    out.push(realize_with(&f, AdjectiveOrder::SizeFirst, &config.determiner));
                    for &size in &sizes {
                        let f = SemanticFrame { size: Some(size), ..f };
                        for &order in &orders {
                            out.push(realize_with(&f, order, &config.determiner));
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn dedup<T: Ord + Copy>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse command at token {position} ({token:?}): expected {expected}")]
pub struct ParseError {
    pub position: usize,
    /// The offending token, or `<end>` when input ran out.
    pub token: String,
    pub expected: &'static str,
}

/// Parses a command into its semantic frame. Accepts both determiners and
/// both adjective orders.
pub fn parse(tokens: &CommandTokens) -> Result<SemanticFrame, ParseError> {
    let toks = tokens.tokens();
    let mut pos = 0;
    let at = |pos: usize| toks.get(pos).map(String::as_str);
    let fail = |pos: usize, expected: &'static str| ParseError {
        position: pos,
        token: toks.get(pos).cloned().unwrap_or_else(|| "<end>".to_owned()),
        expected,
    };

    let verb = match at(pos) {
        Some("walk") => Verb::Walk,
        Some("push") => Verb::Push,
        Some("pull") => Verb::Pull,
        _ => return Err(fail(pos, "a verb (walk, push, pull)")),
    };
    pos += 1;
    if verb == Verb::Walk {
        if at(pos) != Some("to") {
            return Err(fail(pos, "'to'"));
        }
        pos += 1;
    }
    match at(pos) {
        Some(d) if DETERMINERS.contains(&d) => pos += 1,
        _ => return Err(fail(pos, "a determiner ('a' or 'the')")),
    }

    let mut size = None;
    let mut color = None;
    let shape = loop {
        let word = at(pos).ok_or_else(|| fail(pos, "an adjective or a shape noun"))?;
        if let Ok(shape) = word.parse::<Shape>() {
            pos += 1;
            break shape;
        }
        if let Some(s) = SizeWord::ALL.into_iter().find(|s| s.as_str() == word) {
            if size.is_some() {
                return Err(fail(pos, "a color or a shape noun (size already given)"));
            }
            size = Some(s);
        } else if let Ok(c) = word.parse::<Color>() {
            if color.is_some() {
                return Err(fail(pos, "a size or a shape noun (color already given)"));
            }
            color = Some(c);
        } else {
            return Err(fail(pos, "an adjective or a shape noun"));
        }
        pos += 1;
    };

    let rest: Vec<&str> = toks[pos..].iter().map(String::as_str).collect();
    let adverb = if rest.is_empty() {
        None
    } else if let Some(a) = Adverb::ALL.into_iter().find(|a| a.tokens() == rest.as_slice()) {
        Some(a)
    } else {
        // Point at the first token that departs from every adverb spelling.
        let mut bad = pos;
        if rest[0] == "while" {
            bad = pos + 1;
            if rest.len() >= 2 && matches!(rest[1], "spinning" | "zigzagging") {
                bad = pos + 2;
            }
        } else if matches!(rest[0], "cautiously" | "hesitantly") {
            bad = pos + 1;
        }
        return Err(fail(bad, "an adverb or end of command"));
    };

    Ok(SemanticFrame { verb, adverb, size, color, shape })
}

/// Surface form with the default determiner `the`.
pub fn realize(frame: &SemanticFrame, order: AdjectiveOrder) -> CommandTokens {
    realize_with(frame, order, "the")
}

pub fn realize_with(frame: &SemanticFrame, order: AdjectiveOrder, determiner: &str) -> CommandTokens {
    let mut t: Vec<String> = Vec::with_capacity(8);
    t.push(frame.verb.as_str().to_owned());
    if frame.verb == Verb::Walk {
        t.push("to".to_owned());
    }
    t.push(determiner.to_owned());
    t.extend(referent_words(frame, order).into_iter().map(str::to_owned));
    if let Some(adverb) = frame.adverb {
        t.extend(adverb.tokens().iter().map(|s| (*s).to_owned()));
    }
    CommandTokens(t)
}

/// Noun-phrase words (adjectives and noun), without the determiner.
pub fn referent_words(frame: &SemanticFrame, order: AdjectiveOrder) -> Vec<&'static str> {
    let size = frame.size.map(SizeWord::as_str);
    let color = frame.color.map(Color::as_str);
    let adjectives = match order {
        AdjectiveOrder::SizeFirst => [size, color],
        AdjectiveOrder::ColorFirst => [color, size],
    };
    adjectives.into_iter().flatten().chain([frame.shape.as_str()]).collect()
}

/// The referred-target surface form of a command: its noun phrase as written.
pub fn referred_target(tokens: &CommandTokens) -> String {
    let toks = tokens.tokens();
    let start = toks
        .iter()
        .position(|t| DETERMINERS.contains(&t.as_str()))
        .map_or(0, |p| p + 1);
    let end = toks
        .iter()
        .position(|t| t.parse::<Shape>().is_ok())
        .map_or(toks.len(), |p| p + 1);
    toks[start..end.max(start)].join(" ")
}

/// Adjective order used by a surface form, if it carries both adjectives.
pub fn adjective_order_of(tokens: &CommandTokens) -> Option<AdjectiveOrder> {
    let toks = tokens.tokens();
    let size = toks.iter().position(|t| SizeWord::ALL.iter().any(|s| s.as_str() == t))?;
    let color = toks.iter().position(|t| t.parse::<Color>().is_ok())?;
    Some(if size < color { AdjectiveOrder::SizeFirst } else { AdjectiveOrder::ColorFirst })
}
