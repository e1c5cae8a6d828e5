//! Timed firing semantics.
//!
//! A transition is enabled at time τ when every input place holds enough
//! eligible tokens (guard-satisfying, timestamp ≤ τ). Each step advances the
//! clock to the earliest such τ. Among transitions enabled at that instant the
//! one with the smallest id wins; if it belongs to a conflict group, the
//! group's members enabled at the same instant are drawn by weight.

use rand::Rng;
use thiserror::Error;

use super::net::{Marking, PetriNet, PlaceIdx, Token, TransIdx};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enabled {
    pub transition: TransIdx,
    pub at: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub time: SimTime,
    pub transition: TransIdx,
    pub consumed: Vec<(PlaceIdx, Token)>,
    pub produced: Vec<(PlaceIdx, Token)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<Firing>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn fired(&self) -> impl Iterator<Item = TransIdx> + '_ {
        self.events.iter().map(|e| e.transition)
    }

    pub fn last(&self) -> Option<&Firing> {
        self.events.last()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("step budget of {budget} exhausted")]
    StepBudgetExceeded { budget: usize, trace: Trace },
}

type StopPredicate<'a> = Box<dyn Fn(&Marking, usize) -> bool + 'a>;

/// Termination policy for [`PetriNet::run`].
pub struct Stop<'a> {
    pub max_steps: usize,
    until: Option<StopPredicate<'a>>,
}

impl<'a> Stop<'a> {
    /// Run to quiescence, failing after `max_steps` firings.
    pub fn budget(max_steps: usize) -> Self {
        Stop { max_steps, until: None }
    }

    /// Stop successfully as soon as `pred(marking, steps_taken)` holds.
    pub fn when(mut self, pred: impl Fn(&Marking, usize) -> bool + 'a) -> Self {
        self.until = Some(Box::new(pred));
        self
    }

    /// Stop successfully after exactly `n` firings (or earlier at quiescence).
    pub fn after(n: usize) -> Self {
        Stop::budget(n).when(move |_, steps| steps >= n)
    }

    fn satisfied(&self, m: &Marking, steps: usize) -> bool {
        self.until.as_ref().is_some_and(|f| f(m, steps))
    }
}

impl PetriNet {
    /// Positions (within the place's sorted list) of tokens a transition may
    /// consume from `place`, oldest first.
    fn eligible<'m>(
        &'m self,
        t: TransIdx,
        place: PlaceIdx,
        marking: &'m Marking,
    ) -> impl Iterator<Item = (usize, &'m Token)> + 'm {
        let guard = self.guards[t.0].as_ref().filter(|g| g.place == place);
        marking.tokens[place.0]
            .iter()
            .map(|(tok, _)| tok)
            .enumerate()
            .filter(move |(_, tok)| guard.is_none_or(|g| g.predicate.accepts(tok.color())))
    }

    fn enabling_time(&self, t: TransIdx, marking: &Marking) -> Option<SimTime> {
        if self.transitions[t.0].weight <= 0.0 {
            return None;
        }
        let mut at = marking.clock;
        for &(place, mult) in &self.inputs[t.0] {
            let (_, tok) = self.eligible(t, place, marking).nth(mult as usize - 1)?;
            at = at.max(tok.timestamp());
        }
        Some(at)
    }

    /// Every transition that can fire now or later from `marking`, with the
    /// earliest time it can do so. Zero-weight transitions are never listed.
    pub fn enabled(&self, marking: &Marking) -> Vec<Enabled> {
        self.lexicographic
            .iter()
            .filter_map(|&t| self.enabling_time(t, marking).map(|at| Enabled { transition: t, at }))
            .collect()
    }

    /// Fires one transition, or returns `None` (marking untouched) when nothing
    /// can ever fire.
    pub fn step<R: Rng + ?Sized>(&self, marking: &mut Marking, rng: &mut R) -> Option<Firing> {
        let enabled = self.enabled(marking);
        let now = enabled.iter().map(|e| e.at).min()?;
        // `enabled` is in id order, so the first hit is the lexicographic winner.
        let lead = enabled.iter().find(|e| e.at == now)?.transition;
        let group = self.group_of[lead.0];
        let contenders: Vec<TransIdx> = self.groups[group]
            .iter()
            .copied()
            .filter(|t| enabled.iter().any(|e| e.transition == *t && e.at == now))
            .collect();
        let chosen = if contenders.len() == 1 {
            contenders[0]
        } else {
            let total: f64 = contenders.iter().map(|t| self.transitions[t.0].weight).sum();
            let mut draw = rng.random::<f64>() * total;
            let mut pick = *contenders.last().unwrap();
            for &t in &contenders {
                let w = self.transitions[t.0].weight;
                if draw < w {
                    pick = t;
                    break;
                }
                draw -= w;
            }
            pick
        };
        Some(self.fire(chosen, now, marking))
    }

    fn fire(&self, t: TransIdx, now: SimTime, marking: &mut Marking) -> Firing {
        marking.clock = now;
        let mut consumed = Vec::new();
        // Oldest token consumed per input, by input position, for color expressions.
        let mut first_color: Vec<String> = Vec::with_capacity(self.inputs[t.0].len());
        for &(place, mult) in &self.inputs[t.0] {
            let positions: Vec<usize> =
                self.eligible(t, place, marking).take(mult as usize).map(|(i, _)| i).collect();
            debug_assert_eq!(positions.len(), mult as usize);
            for (removed, pos) in positions.into_iter().enumerate() {
                let tok = marking.take(place, pos - removed);
                if removed == 0 {
                    first_color.push(tok.color().to_string());
                }
                consumed.push((place, tok));
            }
        }
        let stamp = now + self.transitions[t.0].delay;
        let mut produced = Vec::new();
        for out in &self.outputs[t.0] {
            let color = out.color.eval(&first_color[out.source_input]);
            for _ in 0..out.multiplicity {
                let tok = Token::new(color.clone(), stamp).expect("arc expressions yield non-empty colors");
                marking.put(out.place, tok.clone());
                produced.push((out.place, tok));
            }
        }
        Firing { time: now, transition: t, consumed, produced }
    }

    /// Steps until quiescence or until `stop` is satisfied.
    pub fn run<R: Rng + ?Sized>(
        &self,
        marking: &mut Marking,
        rng: &mut R,
        stop: &Stop<'_>,
    ) -> Result<Trace, RunError> {
        let mut trace = Trace::default();
        loop {
            if stop.satisfied(marking, trace.len()) {
                return Ok(trace);
            }
            if trace.len() >= stop.max_steps {
                // Quiescent markings are not a budget failure.
                if self.enabled(marking).is_empty() {
                    return Ok(trace);
                }
                return Err(RunError::StepBudgetExceeded { budget: stop.max_steps, trace });
            }
            match self.step(marking, rng) {
                Some(firing) => trace.events.push(firing),
                None => return Ok(trace),
            }
        }
    }
}
