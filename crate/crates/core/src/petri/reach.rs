//! Exhaustive untimed reachability for small nets.
//!
//! Timestamps are ignored, every firable transition is explored (not only the
//! lexicographic winner), and every distinct color binding is tried. The
//! result therefore over-approximates anything the timed engine can visit,
//! which is what makes it useful as a test oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::net::{Marking, PetriNet, TransIdx, UntimedMarking};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("reachability exploration exceeded {0} states")]
pub struct StateBudgetExceeded(pub usize);

/// One way of drawing `mult` tokens from a place: the color the arc
/// expressions read, plus the whole consumed multiset.
type Draw = (String, BTreeMap<String, usize>);

fn draws(available: &BTreeMap<String, usize>, mult: usize) -> Vec<Draw> {
    let mut out = Vec::new();
    for (first, &n) in available {
        let mut rest = available.clone();
        if n == 1 {
            rest.remove(first);
        } else {
            rest.insert(first.clone(), n - 1);
        }
        for mut combo in submultisets(&rest, mult - 1) {
            *combo.entry(first.clone()).or_default() += 1;
            out.push((first.clone(), combo));
        }
    }
    out
}

fn submultisets(pool: &BTreeMap<String, usize>, k: usize) -> Vec<BTreeMap<String, usize>> {
    let entries: Vec<(&String, usize)> = pool.iter().map(|(c, &n)| (c, n)).collect();
    let mut out = Vec::new();
    let mut current = BTreeMap::new();
    fn rec(
        entries: &[(&String, usize)],
        k: usize,
        current: &mut BTreeMap<String, usize>,
        out: &mut Vec<BTreeMap<String, usize>>,
    ) {
        if k == 0 {
            out.push(current.clone());
            return;
        }
        let Some(((color, n), tail)) = entries.split_first() else { return };
        for take in (0..=k.min(*n)).rev() {
            if take > 0 {
                current.insert((*color).clone(), take);
            } else {
                current.remove(*color);
            }
            rec(tail, k - take, current, out);
        }
        current.remove(*color);
    }
    rec(&entries, k, &mut current, &mut out);
    out
}

impl PetriNet {
    fn successors(&self, state: &UntimedMarking) -> Vec<UntimedMarking> {
        let mut next = Vec::new();
        for t in (0..self.transitions.len()).map(TransIdx) {
            if self.transitions[t.0].weight <= 0.0 {
                continue;
            }
            let guard = self.guards[t.0].as_ref();
            let mut per_input: Vec<Vec<Draw>> = Vec::new();
            for &(place, mult) in &self.inputs[t.0] {
                let mut avail = state.0[place.0].clone();
                if let Some(g) = guard.filter(|g| g.place == place) {
                    avail.retain(|c, _| g.predicate.accepts(c));
                }
                let options = if avail.values().sum::<usize>() >= mult as usize {
                    draws(&avail, mult as usize)
                } else {
                    Vec::new()
                };
                per_input.push(options);
            }
            if per_input.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = vec![0usize; per_input.len()];
            loop {
                let mut succ = state.clone();
                for (k, &(place, _)) in self.inputs[t.0].iter().enumerate() {
                    let slot = &mut succ.0[place.0];
                    for (color, n) in &per_input[k][idx[k]].1 {
                        let left = slot[color] - n;
                        if left == 0 {
                            slot.remove(color);
                        } else {
                            slot.insert(color.clone(), left);
                        }
                    }
                }
                for out in &self.outputs[t.0] {
                    let color = out.color.eval(&per_input[out.source_input][idx[out.source_input]].0);
                    *succ.0[out.place.0].entry(color).or_default() += out.multiplicity as usize;
                }
                next.push(succ);
                // odometer over the per-input draw choices
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < per_input[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        next
    }

    /// Every untimed marking reachable from `initial`, including `initial`.
    pub fn reachable_markings(
        &self,
        initial: &Marking,
        max_states: usize,
    ) -> Result<BTreeSet<UntimedMarking>, StateBudgetExceeded> {
        let start = initial.untimed();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(state) = queue.pop_front() {
            for succ in self.successors(&state) {
                if !seen.contains(&succ) {
                    if seen.len() >= max_states {
                        return Err(StateBudgetExceeded(max_states));
                    }
                    seen.insert(succ.clone());
                    queue.push_back(succ);
                }
            }
        }
        Ok(seen)
    }
}
