//! The pedestrian-crossing net.
//!
//! ```text
//! P0 --T0--> P1 --T1--> P2 (+ P3 crossing)
//! P2 --T2 (1-pppd)--> P5 unsafe           P2 --T3 (pppd)--> P4 send alarm
//! P4 --T4 [latency]--> P6 broadcast
//! P6 --T5 (1-plp)--> P7 received          P6 --T6 (plp)--> P8 lost
//! P7 --T7 [perception]--> P9 reacts
//! P9+P3 --T9 (crp)--> P10 safe            P9+P3 --T11 (1-crp)--> P11 collision
//! P8+P3 --T10 [losses < K]--> P3 + P4 (next beacon)
//! P8 --T8 [losses >= K]--> P5
//! P5+P3 --T13 (crp)--> P10                P5+P3 --T12 (1-crp)--> P11
//! P10 --T14--> P0
//! ```
//!
//! Alarm tokens carry the number of alarms lost so far (`tx:j`, `rx:j`,
//! `loss:j`). A loss is recorded one beacon period after the lost alarm was
//! sent, so the next beacon leaves on schedule.
//!
//! Reactions are gated by the stopping test: a correct reaction to a
//! delivered alarm is only possible while the alarm still arrives in time,
//! and a reaction without any alarm (unsafe state) only while the vehicle
//! can stop on perception alone.

use super::config::Effective;
use crate::kinematics::collision_occurs;
use crate::petri::{
    build_net, ColorExpr, ColorPredicate, Guard, InputArc, NetError, OutputArc, PetriNet, Place,
    Transition,
};
use crate::time::SimTime;

pub const PLACES: [(&str, &str); 12] = [
    ("P0", "Initial state"),
    ("P1", "Presence of a pedestrian"),
    ("P2", "Pedestrian enters the street"),
    ("P3", "Pedestrian crossing on green"),
    ("P4", "Warning signals are sent to drivers"),
    ("P5", "Unsafe state"),
    ("P6", "The alert is broadcast"),
    ("P7", "Warning message is received by the driver"),
    ("P8", "Packet loss occurs"),
    ("P9", "The driver reacts"),
    ("P10", "Safe state"),
    ("P11", "Collision"),
];

pub const SAFE: &str = "P10";
pub const COLLISION: &str = "P11";
pub const START: &str = "P0";

/// How alarm losses are decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossPattern {
    /// Each alarm is lost independently with probability `plp`.
    #[default]
    Stochastic,
    /// The first `n` alarms are lost, every later one is delivered.
    ForcedFirst(u32),
}

/// Smallest number of lost alarms after which a delivered alarm arrives too
/// late to stop, or `None` if every alarm the net can deliver is in time.
pub(crate) fn unstoppable_after(eff: &Effective, k: u32, beacon_period: f64) -> Option<u32> {
    (0..k).find(|&j| {
        let latency = delivery_latency(eff.kinematics.t_latency, beacon_period, j);
        collision_occurs(&eff.kinematics.with_latency(latency)).unwrap_or(true)
    })
}

/// Latency of the alarm delivered after `losses` lost ones, measured from the
/// first alarm. This mirrors the net's timing at microsecond resolution.
pub fn delivery_latency(t_latency: f64, beacon_period: f64, losses: u32) -> f64 {
    let lat = secs(t_latency).as_micros();
    let spacing = secs(beacon_period).as_micros().max(lat);
    (lat + u64::from(losses) * spacing) as f64 / 1e6
}

fn secs(s: f64) -> SimTime {
    SimTime::from_secs_f64(s).expect("validated non-negative time")
}

fn counter(place: &str, predicate: ColorPredicate) -> Guard {
    Guard { place: place.into(), predicate }
}

pub(crate) fn build(
    eff: &Effective,
    k: u32,
    beacon_period: f64,
    pattern: LossPattern,
) -> Result<PetriNet, NetError> {
    let p = eff.probs;
    let latency = secs(eff.kinematics.t_latency);
    let period = secs(beacon_period);
    let zero = SimTime::ZERO;
    let t = |id: &str, delay: SimTime, weight: f64, name: &str| Transition::new(id, delay, weight).named(name);

    let (t5, t6) = match pattern {
        LossPattern::Stochastic => (
            t("T5", zero, 1.0 - p.plp, "Packet received"),
            t("T6", period.saturating_sub(latency), p.plp, "Packet lost"),
        ),
        LossPattern::ForcedFirst(n) => (
            t("T5", zero, 1.0, "Packet received").guarded(counter("P6", ColorPredicate::CounterAtLeast(n))),
            t("T6", period.saturating_sub(latency), 1.0, "Packet lost")
                .guarded(counter("P6", ColorPredicate::CounterBelow(n))),
        ),
    };

    // A delivered alarm only allows a correct reaction while stopping is still possible.
    let (t9, t11) = match unstoppable_after(eff, k, beacon_period) {
        Some(0) => (t("T9", zero, 0.0, "Correct reaction"), t("T11", zero, 1.0, "Incorrect reaction")),
        Some(j) => {
            let t9 = t("T9", zero, p.crp, "Correct reaction").guarded(counter("P9", ColorPredicate::CounterBelow(j)));
            let t11 = if p.crp < 1.0 {
                t("T11", zero, 1.0 - p.crp, "Incorrect reaction")
            } else {
                t("T11", zero, 1.0, "Incorrect reaction").guarded(counter("P9", ColorPredicate::CounterAtLeast(j)))
            };
            (t9, t11)
        }
        None => (t("T9", zero, p.crp, "Correct reaction"), t("T11", zero, 1.0 - p.crp, "Incorrect reaction")),
    };

    // Without an alarm the driver can only react to what they see themselves.
    let unaided_stop = collision_occurs(&eff.kinematics.with_latency(0.0)) == Ok(false);
    let (t12, t13) = if unaided_stop {
        (
            t("T12", zero, 1.0 - p.crp, "Incorrect reaction while unsafe"),
            t("T13", zero, p.crp, "Correct reaction while unsafe"),
        )
    } else {
        (
            t("T12", zero, 1.0, "Incorrect reaction while unsafe"),
            t("T13", zero, 0.0, "Correct reaction while unsafe"),
        )
    };

    let transitions = vec![
        t("T0", zero, 1.0, "Leave initial state"),
        t("T1", zero, 1.0, "Pedestrian crosses on green"),
        t("T2", zero, 1.0 - p.pppd, "Crossing button not pressed"),
        t("T3", zero, p.pppd, "Crossing button pressed"),
        t("T4", latency, 1.0, "Broadcast alarm"),
        t5,
        t6,
        t("T7", secs(eff.kinematics.t_perception), 1.0, "Driver perception-reaction delay"),
        t("T8", zero, 1.0, "Loss threshold reached")
            .guarded(counter("P8", ColorPredicate::CounterAtLeast(k))),
        t9,
        t("T10", zero, 1.0, "Crossing continues, next beacon")
            .guarded(counter("P8", ColorPredicate::CounterBelow(k))),
        t11,
        t12,
        t13,
        t("T14", zero, 1.0, "Start over"),
    ];

    let inputs = [
        ("P0", "T0"),
        ("P1", "T1"),
        ("P2", "T2"),
        ("P2", "T3"),
        ("P4", "T4"),
        ("P6", "T5"),
        ("P6", "T6"),
        ("P7", "T7"),
        ("P8", "T8"),
        ("P9", "T9"),
        ("P3", "T9"),
        ("P8", "T10"),
        ("P3", "T10"),
        ("P9", "T11"),
        ("P3", "T11"),
        ("P5", "T12"),
        ("P3", "T12"),
        ("P5", "T13"),
        ("P3", "T13"),
        ("P10", "T14"),
    ]
    .into_iter()
    .map(|(p, t)| InputArc::new(p, t, 1))
    .collect();

    let konst = |c: &str| ColorExpr::Const(c.into());
    let outputs = vec![
        OutputArc::new("T0", "P1", 1),
        OutputArc::new("T1", "P2", 1),
        OutputArc::new("T1", "P3", 1).colored(konst("crossing")),
        OutputArc::new("T2", "P5", 1).colored(konst("nobutton")),
        OutputArc::new("T3", "P4", 1).colored(konst("tx:0")),
        OutputArc::new("T4", "P6", 1),
        OutputArc::new("T5", "P7", 1).colored(ColorExpr::Relabel { from: "P6".into(), tag: "rx".into() }),
        OutputArc::new("T6", "P8", 1).colored(ColorExpr::Increment { from: "P6".into(), tag: "loss".into() }),
        OutputArc::new("T7", "P9", 1),
        OutputArc::new("T8", "P5", 1),
        OutputArc::new("T9", "P10", 1).colored(konst("safe")),
        OutputArc::new("T10", "P3", 1).colored(ColorExpr::Copy { from: "P3".into() }),
        OutputArc::new("T10", "P4", 1).colored(ColorExpr::Relabel { from: "P8".into(), tag: "tx".into() }),
        OutputArc::new("T11", "P11", 1).colored(konst("collision")),
        OutputArc::new("T12", "P11", 1).colored(konst("collision")),
        OutputArc::new("T13", "P10", 1).colored(konst("safe")),
        OutputArc::new("T14", "P0", 1).colored(konst("ped")),
    ];

    let groups = [["T2", "T3"], ["T5", "T6"], ["T9", "T11"], ["T12", "T13"]]
        .iter()
        .map(|g| g.iter().map(|s| s.to_string()).collect())
        .collect();

    build_net(
        PLACES.iter().map(|(id, name)| Place::new(*id, *name)).collect(),
        transitions,
        inputs,
        outputs,
        groups,
    )
}
