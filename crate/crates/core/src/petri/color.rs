//! Token colors and the small fixed vocabulary of guards and arc expressions.
//!
//! A color is a non-empty string. Colors of the form `tag:n` carry an
//! unsigned counter; any other string is a bare tag whose counter reads as 0.

use serde::{Deserialize, Serialize};

/// Splits a color into its tag and counter.
pub fn split_counter(color: &str) -> (&str, u32) {
    match color.rsplit_once(':') {
        Some((tag, n)) => match n.parse::<u32>() {
            Ok(n) => (tag, n),
            Err(_) => (color, 0),
        },
        None => (color, 0),
    }
}

pub fn with_counter(tag: &str, n: u32) -> String {
    format!("{tag}:{n}")
}

/// Total predicate over a single token color.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorPredicate {
    TagIs(String),
    CounterBelow(u32),
    CounterAtLeast(u32),
}

impl ColorPredicate {
    pub fn accepts(&self, color: &str) -> bool {
        let (tag, n) = split_counter(color);
        match self {
            ColorPredicate::TagIs(t) => tag == t,
            ColorPredicate::CounterBelow(bound) => n < *bound,
            ColorPredicate::CounterAtLeast(bound) => n >= *bound,
        }
    }
}

/// A transition guard: tokens in `place` are only eligible for consumption
/// by the guarded transition when their color satisfies `predicate`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Guard {
    pub place: String,
    pub predicate: ColorPredicate,
}

/// How the color of a produced token is computed from the consumed ones.
///
/// `from` always names an input place of the same transition; the expression
/// reads the oldest token consumed from that place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorExpr {
    /// Color of the oldest token consumed through the first input arc.
    #[default]
    Inherit,
    Const(String),
    Copy { from: String },
    /// Keeps the counter, replaces the tag.
    Relabel { from: String, tag: String },
    /// Counter plus one, with a new tag.
    Increment { from: String, tag: String },
}

impl ColorExpr {
    pub(crate) fn source(&self) -> Option<&str> {
        match self {
            ColorExpr::Inherit | ColorExpr::Const(_) => None,
            ColorExpr::Copy { from }
            | ColorExpr::Relabel { from, .. }
            | ColorExpr::Increment { from, .. } => Some(from),
        }
    }

    /// Evaluates against the source color (the resolved `from` or first-arc token).
    pub(crate) fn eval(&self, source: &str) -> String {
        match self {
            ColorExpr::Inherit | ColorExpr::Copy { .. } => source.to_string(),
            ColorExpr::Const(c) => c.clone(),
            ColorExpr::Relabel { tag, .. } => with_counter(tag, split_counter(source).1),
            ColorExpr::Increment { tag, .. } => {
                with_counter(tag, split_counter(source).1.saturating_add(1))
            }
        }
    }
}
