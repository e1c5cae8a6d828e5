//! Net description files and trace export.
//!
//! Net descriptions are TOML documents:
//!
//! ```toml
//! format = "petri-net"
//! version = 1
//! conflict_groups = [["ta", "tb"]]
//!
//! [[place]]
//! id = "p"
//! name = "input"
//!
//! [[transition]]
//! id = "ta"
//! delay_us = 3000
//! weight = 1.0
//! guard = { place = "p", predicate = { counter_below = 3 } }
//!
//! [[input]]
//! place = "p"
//! transition = "ta"
//! multiplicity = 1
//!
//! [[output]]
//! transition = "ta"
//! place = "p"
//! multiplicity = 1
//! color = { increment = { from = "p", tag = "n" } }
//! ```
//!
//! Delays are integer microseconds so the file is exact.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::color::{ColorExpr, Guard};
use super::engine::Trace;
use super::net::{build_net, InputArc, NetError, OutputArc, PetriNet, Place, Token, Transition};
use crate::time::SimTime;

pub const NET_FORMAT: &str = "petri-net";
pub const NET_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed net description: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize net: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unsupported net description header {format:?} version {version}")]
    Header { format: String, version: u32 },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    format: String,
    version: u32,
    #[serde(default)]
    conflict_groups: Vec<Vec<String>>,
    #[serde(default, rename = "place")]
    places: Vec<PlaceDoc>,
    #[serde(default, rename = "transition")]
    transitions: Vec<TransitionDoc>,
    #[serde(default, rename = "input")]
    inputs: Vec<InputDoc>,
    #[serde(default, rename = "output")]
    outputs: Vec<OutputDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceDoc {
    id: String,
    #[serde(default)]
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    id: String,
    #[serde(default)]
    name: String,
    #[serde(default)]
    delay_us: u64,
    weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<Guard>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    place: String,
    transition: String,
    #[serde(default = "one")]
    multiplicity: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputDoc {
    transition: String,
    place: String,
    #[serde(default = "one")]
    multiplicity: u32,
    #[serde(default, skip_serializing_if = "is_inherit")]
    color: ColorExpr,
}

fn one() -> u32 {
    1
}

fn is_inherit(c: &ColorExpr) -> bool {
    *c == ColorExpr::Inherit
}

pub fn parse_net(text: &str) -> Result<PetriNet, FormatError> {
    let doc: NetDoc = toml::from_str(text)?;
    if doc.format != NET_FORMAT || doc.version != NET_VERSION {
        return Err(FormatError::Header { format: doc.format, version: doc.version });
    }
    let places = doc
        .places
        .into_iter()
        .map(|p| {
            let name = if p.name.is_empty() { p.id.clone() } else { p.name };
            Place { id: p.id, name }
        })
        .collect();
    let transitions = doc
        .transitions
        .into_iter()
        .map(|t| Transition {
            name: if t.name.is_empty() { t.id.clone() } else { t.name },
            id: t.id,
            delay: SimTime::from_micros(t.delay_us),
            weight: t.weight,
            guard: t.guard,
        })
        .collect();
    let inputs = doc
        .inputs
        .into_iter()
        .map(|a| InputArc { place: a.place, transition: a.transition, multiplicity: a.multiplicity })
        .collect();
    let outputs = doc
        .outputs
        .into_iter()
        .map(|a| OutputArc {
            transition: a.transition,
            place: a.place,
            multiplicity: a.multiplicity,
            color: a.color,
        })
        .collect();
    Ok(build_net(places, transitions, inputs, outputs, doc.conflict_groups)?)
}

pub fn render_net(net: &PetriNet) -> Result<String, FormatError> {
    let doc = NetDoc {
        format: NET_FORMAT.into(),
        version: NET_VERSION,
        conflict_groups: net.conflict_groups().to_vec(),
        places: net
            .places()
            .iter()
            .map(|p| PlaceDoc { id: p.id.clone(), name: p.name.clone() })
            .collect(),
        transitions: net
            .transitions()
            .iter()
            .map(|t| TransitionDoc {
                id: t.id.clone(),
                name: t.name.clone(),
                delay_us: t.delay.as_micros(),
                weight: t.weight,
                guard: t.guard.clone(),
            })
            .collect(),
        inputs: net
            .input_arcs()
            .iter()
            .map(|a| InputDoc {
                place: a.place.clone(),
                transition: a.transition.clone(),
                multiplicity: a.multiplicity,
            })
            .collect(),
        outputs: net
            .output_arcs()
            .iter()
            .map(|a| OutputDoc {
                transition: a.transition.clone(),
                place: a.place.clone(),
                multiplicity: a.multiplicity,
                color: a.color.clone(),
            })
            .collect(),
    };
    Ok(toml::to_string(&doc)?)
}

fn token_list(net: &PetriNet, tokens: &[(super::net::PlaceIdx, Token)]) -> String {
    tokens
        .iter()
        .map(|(p, t)| format!("{}/{}@{}", net.place(*p).id, t.color(), t.timestamp()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes `time,transition,consumed,produced` rows. Token lists are
/// space-separated `place/color@time` items.
pub fn write_trace<W: Write>(net: &PetriNet, trace: &Trace, out: W) -> Result<(), FormatError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["time", "transition", "consumed", "produced"])?;
    for e in &trace.events {
        w.write_record([
            e.time.to_string(),
            net.transition(e.transition).id.clone(),
            token_list(net, &e.consumed),
            token_list(net, &e.produced),
        ])?;
    }
    w.flush()?;
    Ok(())
}
