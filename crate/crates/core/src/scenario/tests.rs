use super::*;
use crate::kinematics::{collision_occurs, KinematicsParams};
use crate::petri::format::{parse_net, render_net};

fn cfg(pppd: f64, plp: f64, crp: f64, v0: f64) -> ScenarioConfig {
    ScenarioConfig {
        kinematics: KinematicsParams { v0, t_latency: 0.1, t_perception: 1.0, a: 4.0, d: 200.0 },
        probs: ScenarioProbabilities { pppd, plp, crp },
        ..Default::default()
    }
}

fn ids<'a>(s: &'a Scenario, trace: &Trace) -> Vec<&'a str> {
    trace.fired().map(|t| s.net().transition(t).id.as_str()).collect()
}

#[test]
fn default_net_shape() {
    let net = build_scenario_net(&ScenarioConfig::default(), &Channel::default()).unwrap();
    assert_eq!(net.places().len(), 12);
    assert_eq!(net.transitions().len(), 15);
    assert_eq!(net.conflict_groups().len(), 4);
    let w = |id: &str| net.transition(net.trans_idx(id).unwrap()).weight;
    assert!((w("T2") - 0.05).abs() < 1e-12 && w("T3") == 0.95);
    assert!((w("T5") - 0.9).abs() < 1e-12 && w("T6") == 0.1);
    assert_eq!(w("T9"), 0.95);
    assert!((w("T12") - 0.05).abs() < 1e-12);
    let t4 = net.transition(net.trans_idx("T4").unwrap());
    assert_eq!(t4.delay, SimTime::from_micros(100_000));
    let t7 = net.transition(net.trans_idx("T7").unwrap());
    assert_eq!(t7.delay, SimTime::from_micros(1_000_000));
}

#[test]
fn exported_net_round_trips() {
    let net = build_scenario_net(&ScenarioConfig::default(), &Channel::default()).unwrap();
    assert_eq!(parse_net(&render_net(&net).unwrap()).unwrap(), net);
}

#[test]
fn deterministic_safe_walk() {
    let s = Scenario::new(&cfg(1.0, 0.0, 1.0, 20.0), &Channel::default()).unwrap();
    let out = s.run_trial(7).unwrap();
    assert_eq!((out.verdict, out.cause), (Verdict::Safe, Cause::CorrectReaction));
    assert_eq!(ids(&s, &out.trace), ["T0", "T1", "T3", "T4", "T5", "T7", "T9"]);
    let times: Vec<u64> = out.trace.events.iter().map(|e| e.time.as_micros()).collect();
    assert_eq!(times, [0, 0, 0, 0, 100_000, 100_000, 1_100_000]);
    assert_eq!(out.alarm_latency_used, 0.1);
    assert!((out.stop_distance - 72.0).abs() < 1e-9);
    assert!(out.first_cycle_direct_safe());
}

#[test]
fn unstoppable_speed_forces_collision() {
    let s = Scenario::new(&cfg(1.0, 0.0, 1.0, 36.0), &Channel::default()).unwrap();
    assert_eq!(s.net().transition(s.net().trans_idx("T9").unwrap()).weight, 0.0);
    let out = s.run_trial(1).unwrap();
    assert_eq!(out.verdict, Verdict::Collision);
    assert_eq!(out.cause, Cause::IncorrectReaction);
    assert!((out.stop_distance - 201.6).abs() < 1e-9);
}

#[test]
fn deterministic_losses_reach_eligibility_at_three_periods() {
    let s = Scenario::new(&cfg(1.0, 1.0, 0.5, 20.0), &Channel::default()).unwrap();
    let out = s.run_trial(3).unwrap();
    let net = s.net();
    let p8 = net.place_idx("P8").unwrap();
    let p5 = net.place_idx("P5").unwrap();
    let first_loss = out.trace.events.iter().find(|e| net.transition(e.transition).id == "T6").unwrap();
    assert_eq!(first_loss.produced, vec![(p8, Token::new("loss:1", SimTime::from_micros(100_000)).unwrap())]);
    let t8 = out.trace.events.iter().find(|e| net.transition(e.transition).id == "T8").unwrap();
    assert_eq!(t8.time, SimTime::from_micros(300_000));
    assert_eq!(t8.produced[0].0, p5);
    assert_eq!(out.losses, 3);
    assert!(matches!(out.cause, Cause::PacketLossCascade | Cause::PedestrianCrossedDuringUnsafe));
    let sends: Vec<u64> = out
        .trace
        .events
        .iter()
        .filter(|e| net.transition(e.transition).id == "T4")
        .map(|e| e.time.as_micros())
        .collect();
    assert_eq!(sends, [0, 100_000, 200_000]);
}

#[test]
fn late_delivery_after_losses_is_physically_gated() {
    // 35 m/s: x_total = 35(1 + L) + 153.125, so 198.6 m at L = 0.3 s but
    // 202.1 m at L = 0.4 s.
    let c = ScenarioConfig { loss_to_collision_threshold: 4, ..cfg(1.0, 0.0, 1.0, 35.0) };
    assert!(!collision_occurs(&c.kinematics.with_latency(0.3)).unwrap());
    assert!(collision_occurs(&c.kinematics.with_latency(0.4)).unwrap());
    let ch = Channel::default();
    let two = Scenario::with_loss_pattern(&c, &ch, LossPattern::ForcedFirst(2)).unwrap().run_trial(0).unwrap();
    assert_eq!((two.verdict, two.cause), (Verdict::Safe, Cause::CorrectReaction));
    assert!((two.alarm_latency_used - 0.3).abs() < 1e-12);
    let three = Scenario::with_loss_pattern(&c, &ch, LossPattern::ForcedFirst(3)).unwrap().run_trial(0).unwrap();
    assert_eq!((three.verdict, three.cause), (Verdict::Collision, Cause::IncorrectReaction));
    assert!((three.alarm_latency_used - 0.4).abs() < 1e-12);
    assert_eq!(three.losses, 3);
}

#[test]
fn classification_table() {
    let s = Scenario::new(&ScenarioConfig::default(), &Channel::default()).unwrap();
    assert!(matches!(classify_trace(s.net(), &Trace::default()), Err(ScenarioError::Unclassifiable(_))));
    // Force each terminal path with degenerate probabilities.
    let ch = Channel::default();
    let cases = [
        (cfg(0.0, 0.0, 1.0, 20.0), Verdict::Safe, Cause::PedestrianCrossedDuringUnsafe, "T13"),
        (cfg(0.0, 0.0, 0.0, 20.0), Verdict::Collision, Cause::NoButtonPressAndNoRecovery, "T12"),
        (cfg(1.0, 0.0, 0.0, 20.0), Verdict::Collision, Cause::IncorrectReaction, "T11"),
        (cfg(1.0, 1.0, 0.0, 20.0), Verdict::Collision, Cause::PacketLossCascade, "T12"),
    ];
    for (c, verdict, cause, last) in cases {
        let s = Scenario::new(&c, &ch).unwrap();
        let out = s.run_trial(11).unwrap();
        assert_eq!((out.verdict, out.cause), (verdict, cause), "{c:?}");
        assert_eq!(*ids(&s, &out.trace).last().unwrap(), last);
    }
}

#[test]
fn seeds_reproduce_outcomes() {
    let s = Scenario::new(&ScenarioConfig::default(), &Channel::default()).unwrap();
    for seed in 0..50 {
        assert_eq!(s.run_trial(seed).unwrap(), s.run_trial(seed).unwrap());
    }
}

#[test]
fn reachability_of_terminal_places() {
    let ch = Channel::default();
    let s = Scenario::new(&ScenarioConfig::default(), &ch).unwrap();
    let net = s.net();
    let states = net.reachable_markings(&s.initial_marking(), 10_000).unwrap();
    let (safe, coll) = (net.place_idx(SAFE).unwrap(), net.place_idx(COLLISION).unwrap());
    assert!(states.iter().any(|m| m.count(safe) > 0));
    assert!(states.iter().any(|m| m.count(coll) > 0));

    // pppd = 1: the no-button unsafe token never appears.
    let s = Scenario::new(&cfg(1.0, 0.1, 0.95, 20.0), &ch).unwrap();
    let p5 = s.net().place_idx("P5").unwrap();
    let states = s.net().reachable_markings(&s.initial_marking(), 10_000).unwrap();
    assert!(states.iter().all(|m| !m.colors(p5).contains_key("nobutton")));
    assert!(states.iter().any(|m| m.count(p5) > 0), "loss path still reaches P5");

    // plp = 1: the driver never receives an alarm, so T11 can never fire.
    for crp in [1.0, 0.95] {
        let s = Scenario::new(&cfg(0.95, 1.0, crp, 20.0), &ch).unwrap();
        let net = s.net();
        let p9 = net.place_idx("P9").unwrap();
        let coll = net.place_idx(COLLISION).unwrap();
        let states = net.reachable_markings(&s.initial_marking(), 10_000).unwrap();
        assert!(states.iter().all(|m| m.count(p9) == 0));
        assert_eq!(states.iter().any(|m| m.count(coll) > 0), crp < 1.0);
    }
}

#[test]
fn delivery_latency_tracks_beacon_spacing() {
    assert_eq!(delivery_latency(0.1, 0.1, 0), 0.1);
    assert_eq!(delivery_latency(0.052, 0.1, 2), 0.252);
    // latency longer than the beacon period pushes beacons apart
    assert_eq!(delivery_latency(0.15, 0.1, 1), 0.3);
}
