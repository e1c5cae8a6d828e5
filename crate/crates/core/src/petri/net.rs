//! Net structure, tokens and markings.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::color::{ColorExpr, Guard};
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("empty identifier")]
    EmptyId,
    #[error("duplicate place {0}")]
    DuplicatePlace(String),
    #[error("duplicate transition {0}")]
    DuplicateTransition(String),
    #[error("unknown place {0}")]
    UnknownPlace(String),
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("arc {place} -> {transition} has zero multiplicity")]
    ZeroMultiplicity { place: String, transition: String },
    #[error("duplicate arc between {place} and {transition}")]
    DuplicateArc { place: String, transition: String },
    #[error("transition {0} has a non-finite or negative weight")]
    InvalidWeight(String),
    #[error("transition {0} has no input arcs")]
    NoInputs(String),
    #[error("transition {transition} refers to {place}, which is not one of its input places")]
    NotAnInput { transition: String, place: String },
    #[error("conflict group {0} is empty")]
    EmptyConflictGroup(usize),
    #[error("transition {0} appears in more than one conflict group")]
    OverlappingConflictGroups(String),
    #[error("transition {transition} in conflict group {group} has different input arcs than {first}")]
    MismatchedConflictInputs { group: usize, first: String, transition: String },
    #[error("token color must be non-empty")]
    EmptyColor,
}

/// A colored, timestamped token. `timestamp` is the earliest time the token
/// can be consumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    color: String,
    timestamp: SimTime,
}

impl Token {
    pub fn new(color: impl Into<String>, timestamp: SimTime) -> Result<Self, NetError> {
        let color = color.into();
        if color.is_empty() {
            return Err(NetError::EmptyColor);
        }
        Ok(Token { color, timestamp })
    }

    pub fn color(&self) -> &str {
        &self.color
    }

    pub fn timestamp(&self) -> SimTime {
        self.timestamp
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: String,
    pub name: String,
}

impl Place {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Place { id: id.into(), name: name.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: String,
    pub name: String,
    /// Added to the firing time to timestamp every produced token.
    pub delay: SimTime,
    /// Relative weight inside its conflict group. A zero-weight transition never fires.
    pub weight: f64,
    pub guard: Option<Guard>,
}

impl Transition {
    pub fn new(id: impl Into<String>, delay: SimTime, weight: f64) -> Self {
        let id = id.into();
        Transition { name: id.clone(), id, delay, weight, guard: None }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn guarded(mut self, guard: Guard) -> Self {
        self.guard = Some(guard);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputArc {
    pub place: String,
    pub transition: String,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputArc {
    pub transition: String,
    pub place: String,
    pub multiplicity: u32,
    pub color: ColorExpr,
}

impl InputArc {
    pub fn new(place: impl Into<String>, transition: impl Into<String>, multiplicity: u32) -> Self {
        InputArc { place: place.into(), transition: transition.into(), multiplicity }
    }
}

impl OutputArc {
    pub fn new(transition: impl Into<String>, place: impl Into<String>, multiplicity: u32) -> Self {
        OutputArc {
            transition: transition.into(),
            place: place.into(),
            multiplicity,
            color: ColorExpr::Inherit,
        }
    }

    pub fn colored(mut self, color: ColorExpr) -> Self {
        self.color = color;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceIdx(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransIdx(pub(crate) usize);

impl PlaceIdx {
    pub fn index(self) -> usize {
        self.0
    }
}

impl TransIdx {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ResolvedGuard {
    pub place: PlaceIdx,
    pub predicate: super::color::ColorPredicate,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ResolvedOutput {
    pub place: PlaceIdx,
    pub multiplicity: u32,
    pub color: ColorExpr,
    /// Position in the transition's input list the color is read from.
    pub source_input: usize,
}

/// An immutable, validated net. Safe to share between concurrent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct PetriNet {
    pub(crate) places: Vec<Place>,
    pub(crate) transitions: Vec<Transition>,
    pub(crate) input_arcs: Vec<InputArc>,
    pub(crate) output_arcs: Vec<OutputArc>,
    pub(crate) conflict_groups: Vec<Vec<String>>,
    place_lookup: HashMap<String, PlaceIdx>,
    trans_lookup: HashMap<String, TransIdx>,
    pub(crate) inputs: Vec<Vec<(PlaceIdx, u32)>>,
    pub(crate) outputs: Vec<Vec<ResolvedOutput>>,
    pub(crate) guards: Vec<Option<ResolvedGuard>>,
    /// Group index per transition; undeclared transitions form singleton groups.
    pub(crate) group_of: Vec<usize>,
    pub(crate) groups: Vec<Vec<TransIdx>>,
    /// Transition indices sorted by id.
    pub(crate) lexicographic: Vec<TransIdx>,
}

/// Validates the parts and assembles a net. The first offending element is
/// named in the error.
pub fn build_net(
    places: Vec<Place>,
    transitions: Vec<Transition>,
    input_arcs: Vec<InputArc>,
    output_arcs: Vec<OutputArc>,
    conflict_groups: Vec<Vec<String>>,
) -> Result<PetriNet, NetError> {
    let mut place_lookup = HashMap::new();
    for (i, p) in places.iter().enumerate() {
        if p.id.is_empty() {
            return Err(NetError::EmptyId);
        }
        if place_lookup.insert(p.id.clone(), PlaceIdx(i)).is_some() {
            return Err(NetError::DuplicatePlace(p.id.clone()));
        }
    }
    let mut trans_lookup = HashMap::new();
    for (i, t) in transitions.iter().enumerate() {
        if t.id.is_empty() {
            return Err(NetError::EmptyId);
        }
        if trans_lookup.insert(t.id.clone(), TransIdx(i)).is_some() {
            return Err(NetError::DuplicateTransition(t.id.clone()));
        }
        if !t.weight.is_finite() || t.weight < 0.0 {
            return Err(NetError::InvalidWeight(t.id.clone()));
        }
    }

    let place_of = |id: &str| {
        place_lookup.get(id).copied().ok_or_else(|| NetError::UnknownPlace(id.to_string()))
    };
    let trans_of = |id: &str| {
        trans_lookup.get(id).copied().ok_or_else(|| NetError::UnknownTransition(id.to_string()))
    };

    let mut inputs: Vec<Vec<(PlaceIdx, u32)>> = vec![Vec::new(); transitions.len()];
    for arc in &input_arcs {
        let p = place_of(&arc.place)?;
        let t = trans_of(&arc.transition)?;
        if arc.multiplicity == 0 {
            return Err(NetError::ZeroMultiplicity {
                place: arc.place.clone(),
                transition: arc.transition.clone(),
            });
        }
        if inputs[t.0].iter().any(|(q, _)| *q == p) {
            return Err(NetError::DuplicateArc {
                place: arc.place.clone(),
                transition: arc.transition.clone(),
            });
        }
        inputs[t.0].push((p, arc.multiplicity));
    }
    for (t, ins) in transitions.iter().zip(&inputs) {
        if ins.is_empty() {
            return Err(NetError::NoInputs(t.id.clone()));
        }
    }

    let input_position = |t: TransIdx, place: &str| -> Result<usize, NetError> {
        let p = place_of(place)?;
        inputs[t.0].iter().position(|(q, _)| *q == p).ok_or_else(|| NetError::NotAnInput {
            transition: transitions[t.0].id.clone(),
            place: place.to_string(),
        })
    };

    let mut guards = Vec::with_capacity(transitions.len());
    for (i, t) in transitions.iter().enumerate() {
        guards.push(match &t.guard {
            Some(g) => {
                let pos = input_position(TransIdx(i), &g.place)?;
                Some(ResolvedGuard { place: inputs[i][pos].0, predicate: g.predicate.clone() })
            }
            None => None,
        });
    }

    let mut outputs: Vec<Vec<ResolvedOutput>> = vec![Vec::new(); transitions.len()];
    let mut seen_out = HashSet::new();
    for arc in &output_arcs {
        let t = trans_of(&arc.transition)?;
        let p = place_of(&arc.place)?;
        if arc.multiplicity == 0 {
            return Err(NetError::ZeroMultiplicity {
                place: arc.place.clone(),
                transition: arc.transition.clone(),
            });
        }
        if !seen_out.insert((t, p)) {
            return Err(NetError::DuplicateArc {
                place: arc.place.clone(),
                transition: arc.transition.clone(),
            });
        }
        let source_input = match arc.color.source() {
            Some(src) => input_position(t, src)?,
            None => 0,
        };
        outputs[t.0].push(ResolvedOutput {
            place: p,
            multiplicity: arc.multiplicity,
            color: arc.color.clone(),
            source_input,
        });
    }

    let mut group_of = vec![usize::MAX; transitions.len()];
    let mut groups = Vec::new();
    for (g, members) in conflict_groups.iter().enumerate() {
        if members.is_empty() {
            return Err(NetError::EmptyConflictGroup(g));
        }
        let mut idxs = Vec::with_capacity(members.len());
        for id in members {
            let t = trans_of(id)?;
            if group_of[t.0] != usize::MAX {
                return Err(NetError::OverlappingConflictGroups(id.clone()));
            }
            group_of[t.0] = groups.len();
            idxs.push(t);
        }
        let mut reference = inputs[idxs[0].0].clone();
        reference.sort();
        for t in &idxs[1..] {
            let mut other = inputs[t.0].clone();
            other.sort();
            if other != reference {
                return Err(NetError::MismatchedConflictInputs {
                    group: g,
                    first: members[0].clone(),
                    transition: transitions[t.0].id.clone(),
                });
            }
        }
        groups.push(idxs);
    }
    for (i, slot) in group_of.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = groups.len();
            groups.push(vec![TransIdx(i)]);
        }
    }

    let mut lexicographic: Vec<TransIdx> = (0..transitions.len()).map(TransIdx).collect();
    lexicographic.sort_by(|a, b| transitions[a.0].id.cmp(&transitions[b.0].id));

    Ok(PetriNet {
        places,
        transitions,
        input_arcs,
        output_arcs,
        conflict_groups,
        place_lookup,
        trans_lookup,
        inputs,
        outputs,
        guards,
        group_of,
        groups,
        lexicographic,
    })
}

impl PetriNet {
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn input_arcs(&self) -> &[InputArc] {
        &self.input_arcs
    }

    pub fn output_arcs(&self) -> &[OutputArc] {
        &self.output_arcs
    }

    /// Conflict groups as declared (undeclared singletons are not listed).
    pub fn conflict_groups(&self) -> &[Vec<String>] {
        &self.conflict_groups
    }

    pub fn place_idx(&self, id: &str) -> Option<PlaceIdx> {
        self.place_lookup.get(id).copied()
    }

    pub fn trans_idx(&self, id: &str) -> Option<TransIdx> {
        self.trans_lookup.get(id).copied()
    }

    pub fn place(&self, idx: PlaceIdx) -> &Place {
        &self.places[idx.0]
    }

    pub fn transition(&self, idx: TransIdx) -> &Transition {
        &self.transitions[idx.0]
    }

    /// A marking at clock zero holding the given tokens.
    pub fn marking<'a>(
        &self,
        tokens: impl IntoIterator<Item = (&'a str, Token)>,
    ) -> Result<Marking, NetError> {
        let mut m = Marking::empty(self);
        for (place, token) in tokens {
            let p = self.place_idx(place).ok_or_else(|| NetError::UnknownPlace(place.into()))?;
            m.put(p, token);
        }
        Ok(m)
    }
}

/// The mutable state of a run: a multiset of tokens per place plus the clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marking {
    /// Per place, kept sorted by (timestamp, insertion sequence).
    pub(crate) tokens: Vec<Vec<(Token, u64)>>,
    pub(crate) clock: SimTime,
    next_seq: u64,
}

impl Marking {
    pub fn empty(net: &PetriNet) -> Self {
        Marking { tokens: vec![Vec::new(); net.places.len()], clock: SimTime::ZERO, next_seq: 0 }
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn put(&mut self, place: PlaceIdx, token: Token) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let slot = &mut self.tokens[place.0];
        let pos = slot.partition_point(|(t, _)| t.timestamp <= token.timestamp);
        slot.insert(pos, (token, seq));
    }

    /// Tokens in `place`, oldest first.
    pub fn tokens(&self, place: PlaceIdx) -> impl Iterator<Item = &Token> {
        self.tokens[place.0].iter().map(|(t, _)| t)
    }

    pub fn count(&self, place: PlaceIdx) -> usize {
        self.tokens[place.0].len()
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }

    pub(crate) fn take(&mut self, place: PlaceIdx, position: usize) -> Token {
        self.tokens[place.0].remove(position).0
    }

    /// Forgets timestamps and insertion order.
    pub fn untimed(&self) -> UntimedMarking {
        UntimedMarking(
            self.tokens
                .iter()
                .map(|slot| {
                    let mut colors: BTreeMap<String, usize> = BTreeMap::new();
                    for (t, _) in slot {
                        *colors.entry(t.color.clone()).or_default() += 1;
                    }
                    colors
                })
                .collect(),
        )
    }
}

/// A marking with timestamps erased: per place, a multiset of colors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UntimedMarking(pub(crate) Vec<BTreeMap<String, usize>>);

impl UntimedMarking {
    pub fn count(&self, place: PlaceIdx) -> usize {
        self.0[place.0].values().sum()
    }

    pub fn colors(&self, place: PlaceIdx) -> &BTreeMap<String, usize> {
        &self.0[place.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(id: &str) -> Transition {
        Transition::new(id, SimTime::ZERO, 1.0)
    }

    #[test]
    fn minimal_cycle_is_valid() {
        let net = build_net(
            vec![Place::new("p", "p")],
            vec![t("t")],
            vec![InputArc::new("p", "t", 1)],
            vec![OutputArc::new("t", "p", 1)],
            vec![],
        )
        .unwrap();
        assert_eq!(net.places().len(), 1);
        assert_eq!(net.groups.len(), 1);
    }

    #[test]
    fn unknown_place_is_named() {
        let err = build_net(
            vec![Place::new("p", "p")],
            vec![t("t")],
            vec![InputArc::new("PX", "t", 1)],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "unknown place PX");
    }

    #[test]
    fn rejects_zero_multiplicity_and_bad_groups() {
        let places = vec![Place::new("a", "a"), Place::new("b", "b")];
        let err = build_net(
            places.clone(),
            vec![t("t")],
            vec![InputArc::new("a", "t", 0)],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, NetError::ZeroMultiplicity { .. }));

        let err = build_net(
            places.clone(),
            vec![t("t1"), t("t2")],
            vec![InputArc::new("a", "t1", 1), InputArc::new("b", "t2", 1)],
            vec![],
            vec![vec!["t1".into(), "t2".into()]],
        )
        .unwrap_err();
        assert!(matches!(err, NetError::MismatchedConflictInputs { .. }));

        let err = build_net(
            places.clone(),
            vec![t("t1"), t("t2")],
            vec![InputArc::new("a", "t1", 1), InputArc::new("a", "t2", 1)],
            vec![],
            vec![vec!["t1".into()], vec!["t1".into(), "t2".into()]],
        )
        .unwrap_err();
        assert_eq!(err, NetError::OverlappingConflictGroups("t1".into()));

        let err = build_net(places, vec![t("t")], vec![], vec![], vec![]).unwrap_err();
        assert_eq!(err, NetError::NoInputs("t".into()));
    }

    #[test]
    fn guard_must_reference_an_input() {
        let err = build_net(
            vec![Place::new("a", "a"), Place::new("b", "b")],
            vec![t("t").guarded(Guard {
                place: "b".into(),
                predicate: super::super::color::ColorPredicate::CounterBelow(1),
            })],
            vec![InputArc::new("a", "t", 1)],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, NetError::NotAnInput { .. }));
    }

    #[test]
    fn marking_keeps_oldest_first() {
        let net = build_net(
            vec![Place::new("p", "p")],
            vec![t("t")],
            vec![InputArc::new("p", "t", 1)],
            vec![],
            vec![],
        )
        .unwrap();
        let p = net.place_idx("p").unwrap();
        let mut m = Marking::empty(&net);
        m.put(p, Token::new("late", SimTime::from_micros(5)).unwrap());
        m.put(p, Token::new("early", SimTime::from_micros(1)).unwrap());
        m.put(p, Token::new("early2", SimTime::from_micros(1)).unwrap());
        let colors: Vec<_> = m.tokens(p).map(Token::color).collect();
        assert_eq!(colors, ["early", "early2", "late"]);
        assert!(Token::new("", SimTime::ZERO).is_err());
    }
}
