#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;

use vanet_safety::petri::{
    build_net, ColorExpr, ColorPredicate, Guard, InputArc, Marking, OutputArc, PetriNet, Place, Token, Transition,
};
use vanet_safety::SimTime;

const COLORS: [&str; 3] = ["a:0", "b:0", "a:1"];

/// A random net with at most 5 places, 5 transitions and 1 to 3 initial tokens.
/// Each transition produces no more tokens than it consumes, so the token
/// count never grows and the untimed state space stays finite.
pub fn random_net<R: Rng>(rng: &mut R) -> (PetriNet, Marking) {
    let n_places = rng.random_range(1..=5usize);
    let n_trans = rng.random_range(1..=5usize);
    let pid = |i: usize| format!("p{i}");
    let places: Vec<Place> = (0..n_places).map(|i| Place::new(pid(i), "")).collect();

    let mut transitions = Vec::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut groups = Vec::new();
    let mut prev_inputs: Option<Vec<(usize, u32)>> = None;
    for t in 0..n_trans {
        let id = format!("t{t}");
        // Sometimes a twin of the previous transition, competing for the same inputs.
        let twin = prev_inputs.is_some() && rng.random_bool(0.3);
        let ins: Vec<(usize, u32)> = if twin {
            prev_inputs.clone().unwrap()
        } else {
            let k = rng.random_range(1..=n_places.min(2));
            let mut chosen: Vec<usize> = (0..n_places).collect();
            chosen.sort_by_key(|_| rng.random::<u32>());
            chosen.truncate(k);
            chosen.into_iter().map(|p| (p, if rng.random_bool(0.8) { 1 } else { 2 })).collect()
        };
        if twin {
            let last = groups.iter_mut().find(|g: &&mut Vec<String>| g.contains(&format!("t{}", t - 1)));
            match last {
                Some(g) => g.push(id.clone()),
                None => groups.push(vec![format!("t{}", t - 1), id.clone()]),
            }
        }
        let delay = SimTime::from_micros(rng.random_range(0..3u64) * 1000);
        let mut tr = Transition::new(id.clone(), delay, rng.random_range(0.1..2.0));
        if rng.random_bool(0.2) {
            let (p, _) = ins[0];
            tr = tr.guarded(Guard { place: pid(p), predicate: ColorPredicate::TagIs("a".into()) });
        }
        transitions.push(tr);
        for &(p, m) in &ins {
            inputs.push(InputArc::new(pid(p), id.clone(), m));
        }
        let budget: u32 = ins.iter().map(|&(_, m)| m).sum();
        let mut produced = 0;
        let mut out_places: Vec<usize> = (0..n_places).collect();
        out_places.sort_by_key(|_| rng.random::<u32>());
        for p in out_places.into_iter().take(if rng.random_bool(0.9) { 2 } else { 0 }) {
            if produced >= budget {
                break;
            }
            let m = if rng.random_bool(0.7) { budget - produced } else { rng.random_range(1..=budget - produced) };
            produced += m;
            let color = match rng.random_range(0..3) {
                0 => ColorExpr::Inherit,
                1 => ColorExpr::Const((*COLORS.choose(rng).unwrap()).into()),
                _ => ColorExpr::Relabel { from: pid(ins[ins.len() - 1].0), tag: "b".into() },
            };
            outputs.push(OutputArc::new(id.clone(), pid(p), m).colored(color));
        }
        prev_inputs = Some(ins);
    }

    let net = build_net(places, transitions, inputs, outputs, groups).expect("generated net is well formed");
    let n_tokens = rng.random_range(1..=3);
    let tokens: Vec<(String, Token)> = (0..n_tokens)
        .map(|_| {
            let p = pid(rng.random_range(0..n_places));
            let c = *COLORS.choose(rng).unwrap();
            (p, Token::new(c, SimTime::from_micros(rng.random_range(0..2u64) * 500)).unwrap())
        })
        .collect();
    let marking = net.marking(tokens.iter().map(|(p, t)| (p.as_str(), t.clone()))).unwrap();
    (net, marking)
}
