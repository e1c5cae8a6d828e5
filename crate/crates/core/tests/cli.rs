use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vanet_safety::petri::format::{parse_net, render_net};
use vanet_safety::scenario::{build_scenario_net, ScenarioConfig};
use vanet_safety::channel::Channel;

const BIN: &str = env!("CARGO_BIN_EXE_vanet-safety");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/default_calibration.txt");
const SWEEP: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sweep.toml");
const SCENARIO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/scenario.toml");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn kin(v0: &str, a: &str) -> Output {
    run(&["kinematics", "--v0", v0, "--t-latency", "0.1", "--t-perception", "1.0", "--a", a, "--d", "200"])
}

#[test]
fn kinematics_verdicts() {
    let o = kin("36", "4");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("x_total=201.600 COLLISION"), "{}", stdout(&o));

    let o = kin("0", "4");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("x_total=0.000 NO-COLLISION"));

    let o = kin("20", "0");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("deceleration must be positive"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["kinematics", "--v0", "20"]).status.code(), Some(2));
    assert_eq!(run(&["kinematics", "--v0", "fast", "--t-latency", "0.1", "--t-perception", "1", "--a", "4", "--d", "200"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn trial_and_montecarlo_are_seeded() {
    let a = run(&["trial", "--config", SCENARIO, "--seed", "11"]);
    let b = run(&["trial", "--config", SCENARIO, "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("verdict="));

    let a = run(&["montecarlo", "--trials", "500", "--seed", "3"]);
    let b = run(&["montecarlo", "--trials", "500", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("trials=500"));
}

#[test]
fn trial_trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = run(&["trial", "--seed", "1", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("time,transition,consumed,produced"));
    assert!(text.lines().nth(1).unwrap().contains("T0"));
}

fn sweep(dir: &Path, name: &str, seed: &str) -> (Output, Vec<u8>) {
    let csv = dir.join(format!("{name}.csv"));
    let o = run(&["sweep", "--config", SWEEP, "--calibration", DATA, "--output", csv.to_str().unwrap(), "--seed", seed]);
    let bytes = fs::read(&csv).unwrap_or_default();
    (o, bytes)
}

#[test]
fn sweep_writes_csv_plot_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = sweep(dir.path(), "a", "7");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 33);
    let violating = text.lines().skip(1).filter(|l| l.ends_with(",true")).count();
    assert!(stdout(&o).contains(&format!("{violating} of 32 cells exceed 200.0 m")), "{}", stdout(&o));
    let svg = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let (_, again) = sweep(dir.path(), "b", "7");
    assert_eq!(text.as_bytes(), &again[..]);
    let (_, other) = sweep(dir.path(), "c", "8");
    assert_ne!(text.as_bytes(), &other[..]);
}

#[test]
fn sweep_missing_calibration_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let missing = dir.path().join("missing.txt");
    let o = run(&["sweep", "--config", SWEEP, "--calibration", missing.to_str().unwrap(), "--output", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.txt"));
    assert!(!csv.exists());
}

#[test]
fn validate_calibration_reports_peak() {
    let o = run(&["validate-calibration", "--calibration", DATA]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("at n=57"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "vanet-calibration v1\n5, 0.002, 0.20\n57, 0.040, 0.10\n").unwrap();
    let o = run(&["validate-calibration", "--calibration", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_net_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.toml");
    let o = run(&["export-net", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("12 places, 15 transitions"));
    let text = fs::read_to_string(&out).unwrap();
    let net = parse_net(&text).unwrap();
    assert_eq!(net.places().len(), 12);
    assert_eq!(net.transitions().len(), 15);
    assert_eq!(render_net(&net).unwrap(), text);
    let direct = build_scenario_net(&ScenarioConfig::default(), &Channel::default()).unwrap();
    assert_eq!(render_net(&direct).unwrap(), text);
}

#[test]
fn export_net_rejects_low_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k1.toml");
    fs::write(&cfg, "format = \"scenario-config\"\nversion = 1\nloss_to_collision_threshold = 1\n").unwrap();
    let out = dir.path().join("net.toml");
    let o = run(&["export-net", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("K must be ≥ 2"), "{}", stderr(&o));
    assert!(!out.exists());
}
