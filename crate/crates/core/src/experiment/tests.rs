use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kinematics::KinematicsParams;
use crate::scenario::ScenarioProbabilities;

fn config(pppd: f64, plp: f64, crp: f64, v0: f64) -> ScenarioConfig {
    ScenarioConfig {
        kinematics: KinematicsParams { v0, t_latency: 0.1, t_perception: 1.0, a: 4.0, d: 200.0 },
        probs: ScenarioProbabilities { pppd, plp, crp },
        ..Default::default()
    }
}

/// Hand form of the stopping distance, independent of the kinematics module.
fn oracle_stop(v: f64, latency: f64, tp: f64, a: f64) -> f64 {
    v * (latency + tp) + v * v / (2.0 * a)
}

#[test]
fn deterministic_safe_config_never_collides() {
    let e = monte_carlo(&config(1.0, 0.0, 1.0, 20.0), &Channel::default(), 500, 9).unwrap();
    assert_eq!(e.collisions, 0);
    assert_eq!(e.collision_probability, 0.0);
    assert_eq!(e.first_cycle_direct_safe, 500);
    assert!((e.mean_stop_distance - 72.0).abs() < 1e-9);
    assert_eq!(e.ci_low, 0.0);
}

#[test]
fn unstoppable_speed_always_collides() {
    // 40·1.1 + 1600/8 = 244 m
    let e = monte_carlo(&config(0.95, 0.1, 0.95, 40.0), &Channel::default(), 2000, 5).unwrap();
    assert_eq!(e.collision_probability, 1.0);
    assert_eq!(e.ci_high, 1.0);
}

#[test]
fn direct_safe_frequency_matches_product() {
    let e = monte_carlo(&ScenarioConfig::default(), &Channel::default(), 20_000, 77).unwrap();
    let expected = 0.95 * 0.90 * 0.95;
    assert!((e.direct_safe_frequency() - expected).abs() < 0.01, "{}", e.direct_safe_frequency());
    assert_eq!(e.causes.iter().sum::<u64>(), 20_000);
}

#[test]
fn zero_trials_rejected() {
    assert!(matches!(
        monte_carlo(&ScenarioConfig::default(), &Channel::default(), 0, 1),
        Err(ExperimentError::NoTrials)
    ));
}

#[test]
fn same_seed_same_estimate() {
    let c = ScenarioConfig::default();
    let ch = Channel::default();
    assert_eq!(monte_carlo(&c, &ch, 3000, 4).unwrap(), monte_carlo(&c, &ch, 3000, 4).unwrap());
}

fn grid(speeds: Vec<f64>, counts: Vec<u32>, trials: u64) -> SweepGrid {
    SweepGrid {
        speeds,
        vehicle_counts: counts,
        perception_times: vec![1.0],
        decelerations: vec![4.0],
        d: 200.0,
        trials_per_cell: trials,
        base_seed: 2024,
    }
}

#[test]
fn small_sweep_flags_match_oracle() {
    // placeholder table at n = 5: 0.002 s latency, 0.01 loss; worst CCH wait 0.05 s
    let out = sweep(&grid(vec![20.0, 36.0, 40.0], vec![5], 2000), &ScenarioConfig::default(), &Channel::default())
        .unwrap();
    assert!(out.failures.is_empty());
    let nominal: Vec<f64> = [20.0, 36.0, 40.0].iter().map(|&v| oracle_stop(v, 0.052, 1.0, 4.0)).collect();
    // 71.04, 199.872, 246.08
    assert_eq!(out.cells.iter().map(|c| c.violates_range).collect::<Vec<_>>(), [false, false, true]);
    for (cell, x) in out.cells.iter().zip(&nominal) {
        assert!((cell.latency_used - 0.052).abs() < 1e-12);
        assert_eq!(cell.loss_used, 0.01);
        // late deliveries after a loss can only lengthen the mean
        assert!(cell.estimate.mean_stop_distance >= x - 1e-9);
        assert!(cell.estimate.mean_stop_distance < x + 0.05 * cell.coords.speed * 0.1);
    }
}

#[test]
fn peak_vehicle_count_has_largest_latency() {
    let out = sweep(&grid(vec![20.0], vec![5, 27, 57, 100, 138], 10), &ScenarioConfig::default(), &Channel::default())
        .unwrap();
    let peak = out.cells.iter().find(|c| c.coords.n_vehicles == 57).unwrap();
    assert!((peak.latency_used - 0.090).abs() < 1e-12);
    assert!(out.cells.iter().all(|c| c.latency_used <= peak.latency_used));
}

#[test]
fn sweep_orders_cells_and_reports_range_errors() {
    let out = sweep(&grid(vec![30.0, 10.0], vec![200, 27, 5], 5), &ScenarioConfig::default(), &Channel::default())
        .unwrap();
    let coords: Vec<(f64, u32)> = out.cells.iter().map(|c| (c.coords.speed, c.coords.n_vehicles)).collect();
    assert_eq!(coords, [(10.0, 5), (10.0, 27), (30.0, 5), (30.0, 27)]);
    assert_eq!(out.failures.len(), 2);
    assert!(out.failures.iter().all(|(c, e)| c.n_vehicles == 200
        && matches!(e, ExperimentError::Scenario(crate::scenario::ScenarioError::Channel(_)))));
}

#[test]
fn risk_is_monotone_in_speed() {
    let speeds: Vec<f64> = (2..=9).map(|i| 5.0 * f64::from(i)).collect();
    let out = sweep(&grid(speeds, vec![27, 138], 400), &ScenarioConfig::default(), &Channel::default()).unwrap();
    for n in [27, 138] {
        let row: Vec<&CellResult> = out.cells.iter().filter(|c| c.coords.n_vehicles == n).collect();
        for pair in row.windows(2) {
            assert!(pair[1].estimate.collision_probability >= pair[0].estimate.collision_probability);
            assert!(pair[1].estimate.mean_stop_distance > pair[0].estimate.mean_stop_distance);
        }
    }
}

#[test]
fn single_trial_cells_are_zero_or_one() {
    let out = sweep(&grid(vec![10.0, 20.0, 30.0], vec![5, 57], 1), &ScenarioConfig::default(), &Channel::default())
        .unwrap();
    for c in &out.cells {
        assert!(c.estimate.collision_probability == 0.0 || c.estimate.collision_probability == 1.0);
    }
}

#[test]
fn export_line_counts_and_round_trip() {
    let ch = Channel::default();
    let one = sweep(&grid(vec![20.0], vec![5], 10), &ScenarioConfig::default(), &ch).unwrap();
    let mut buf = Vec::new();
    let n = export_results(&one.cells, &mut buf).unwrap();
    assert_eq!(n, buf.len());
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);

    let six = sweep(&grid(vec![20.0, 30.0, 40.0], vec![5, 57], 50), &ScenarioConfig::default(), &ch).unwrap();
    let mut buf = Vec::new();
    export_results(&six.cells, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with(&CSV_HEADER.join(",")));

    let rows = parse_results(&text).unwrap();
    assert_eq!(render_parsed(&rows), text);
    for (row, cell) in rows.iter().zip(&six.cells) {
        assert_eq!(row.n_vehicles, cell.coords.n_vehicles);
        assert_eq!(row.violates_range, cell.violates_range);
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-9 * b.abs().max(1e-300);
        assert!(close(row.mean_stop_distance, cell.estimate.mean_stop_distance));
        assert!(close(row.ci_halfwidth, cell.estimate.ci_halfwidth));
        assert!(close(row.latency_used, cell.latency_used));
    }
    assert!(export_results(&[], Vec::new()).is_err());
}

#[test]
fn plot_is_svg_with_range_marker() {
    let out = sweep(&grid(vec![20.0, 30.0], vec![5, 57], 5), &ScenarioConfig::default(), &Channel::default()).unwrap();
    let mut buf = Vec::new();
    write_plot(&out.cells, 200.0, &mut buf).unwrap();
    let svg = String::from_utf8(buf).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("d = 200 m"));
}

#[test]
fn wilson_interval_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for p in [0.05, 0.3, 0.81225] {
        let mut covered = 0;
        for _ in 0..1000 {
            let k = (0..1000).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(k, 1000);
            covered += u32::from(lo <= p && p <= hi);
        }
        assert!(covered >= 930, "p = {p}: covered {covered}/1000");
    }
}
