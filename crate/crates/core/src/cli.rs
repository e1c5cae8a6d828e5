//! Command-line front end.
//!
//! Every subcommand computes its full result in memory before any file is
//! written, so a failing run leaves no partial output behind. Exit codes:
//! 0 success, 1 domain or validation error, 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::channel::{load_calibration, Channel, ChannelCalibration, ChannelError};
use crate::experiment::{export_results, monte_carlo, parse_sweep_config, sweep, write_plot, ExperimentError};
use crate::kinematics::{collision_occurs, total_distance, KinematicsError, KinematicsParams};
use crate::petri::format::{render_net, write_trace, FormatError};
use crate::scenario::{build_scenario_net, parse_config, run_trial, ScenarioConfig, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Calibration { path: PathBuf, source: ChannelError },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ScenarioError },
    #[error("{path}: {source}")]
    SweepConfig { path: PathBuf, source: ExperimentError },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

#[derive(Debug, Parser)]
#[command(name = "vanet-safety", version, about = "Pedestrian-crossing VANET alarm safety analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stopping distance breakdown and collision verdict.
    Kinematics(KinematicsArgs),
    /// Run one seeded scenario trial.
    Trial(TrialArgs),
    /// Estimate the collision probability of one scenario.
    Montecarlo(MonteCarloArgs),
    /// Sweep speed and vehicle count, writing CSV and an SVG plot.
    Sweep(SweepArgs),
    /// Check a calibration table and summarize it.
    ValidateCalibration(CalibrationArg),
    /// Write the scenario net as a net description file.
    ExportNet(ExportNetArgs),
}

#[derive(Debug, Args)]
struct KinematicsArgs {
    /// Initial speed, m/s.
    #[arg(long, allow_hyphen_values = true)]
    v0: f64,
    /// Alarm latency, s.
    #[arg(long, allow_hyphen_values = true)]
    t_latency: f64,
    /// Driver perception-reaction time, s.
    #[arg(long, allow_hyphen_values = true)]
    t_perception: f64,
    /// Deceleration, m/s².
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    /// Distance to the crossing when the alarm is sent, m.
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario config (TOML); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Calibration table; the built-in placeholder when omitted.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrialArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the firing trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Calibration table; the built-in placeholder when omitted.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    output: PathBuf,
    /// SVG plot path; defaults to the CSV path with an .svg extension.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CalibrationArg {
    #[arg(long)]
    calibration: PathBuf,
}

#[derive(Debug, Args)]
struct ExportNetArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    output: PathBuf,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Normal output goes to `out`, diagnostics
/// to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Kinematics(a) => cmd_kinematics(&a),
        Command::Trial(a) => cmd_trial(&a),
        Command::Montecarlo(a) => cmd_montecarlo(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::ValidateCalibration(a) => cmd_validate_calibration(&a.calibration),
        Command::ExportNet(a) => cmd_export_net(&a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

fn calibration(path: Option<&Path>) -> Result<ChannelCalibration, CliError> {
    match path {
        None => Ok(ChannelCalibration::placeholder()),
        Some(p) => load_calibration(&read(p)?).map_err(|source| CliError::Calibration { path: p.into(), source }),
    }
}

fn scenario_inputs(args: &ScenarioArgs) -> Result<(ScenarioConfig, Channel), CliError> {
    let config = match &args.config {
        None => ScenarioConfig::default(),
        Some(p) => parse_config(&read(p)?).map_err(|source| CliError::Config { path: p.clone(), source })?,
    };
    let channel = Channel { calibration: calibration(args.calibration.as_deref())?, ..Channel::default() };
    Ok((config, channel))
}

fn cmd_kinematics(a: &KinematicsArgs) -> Result<String, CliError> {
    let params = KinematicsParams { v0: a.v0, t_latency: a.t_latency, t_perception: a.t_perception, a: a.a, d: a.d };
    let b = total_distance(&params)?;
    let verdict = if collision_occurs(&params)? { "COLLISION" } else { "NO-COLLISION" };
    Ok(format!(
        "x_warning={:.3}\nx_perception={:.3}\nx_brake={:.3}\nx_total={:.3} {verdict}\n",
        b.x_warning, b.x_perception, b.x_brake, b.x_total
    ))
}

fn cmd_trial(a: &TrialArgs) -> Result<String, CliError> {
    let (config, channel) = scenario_inputs(&a.scenario)?;
    let outcome = run_trial(&config, &channel, a.seed)?;
    if let Some(path) = &a.trace {
        let net = build_scenario_net(&config, &channel)?;
        let mut buf = Vec::new();
        write_trace(&net, &outcome.trace, &mut buf)?;
        write(path, &buf)?;
    }
    Ok(format!(
        "verdict={}\ncause={}\nlosses={}\nalarm_latency={:.6}\nstop_distance={:.3}\nfirings={}\n",
        outcome.verdict,
        outcome.cause,
        outcome.losses,
        outcome.alarm_latency_used,
        outcome.stop_distance,
        outcome.trace.len()
    ))
}

fn cmd_montecarlo(a: &MonteCarloArgs) -> Result<String, CliError> {
    let (config, channel) = scenario_inputs(&a.scenario)?;
    let e = monte_carlo(&config, &channel, a.trials, a.seed)?;
    let mut s = String::new();
    let _ = writeln!(s, "trials={}", e.trials);
    let _ = writeln!(s, "collisions={}", e.collisions);
    let _ = writeln!(s, "collision_probability={:.6}", e.collision_probability);
    let _ = writeln!(s, "ci95=[{:.6}, {:.6}]", e.ci_low, e.ci_high);
    let _ = writeln!(s, "mean_stop_distance={:.3}", e.mean_stop_distance);
    let _ = writeln!(s, "first_cycle_direct_safe={:.6}", e.direct_safe_frequency());
    for cause in crate::scenario::Cause::ALL {
        let _ = writeln!(s, "cause.{cause}={}", e.cause_count(cause));
    }
    Ok(s)
}

fn cmd_sweep(a: &SweepArgs) -> Result<String, CliError> {
    let mut cfg =
        parse_sweep_config(&read(&a.config)?).map_err(|source| CliError::SweepConfig { path: a.config.clone(), source })?;
    if let Some(seed) = a.seed {
        cfg.grid.base_seed = seed;
    }
    let channel = Channel { calibration: calibration(a.calibration.as_deref())?, ..Channel::default() };
    let result = sweep(&cfg.grid, &cfg.template, &channel)?;

    let mut csv = Vec::new();
    export_results(&result.cells, &mut csv)?;
    let mut svg = Vec::new();
    write_plot(&result.cells, cfg.grid.d, &mut svg)?;
    let plot = a.plot.clone().unwrap_or_else(|| a.output.with_extension("svg"));
    write(&a.output, &csv)?;
    write(&plot, &svg)?;

    let mut s = String::new();
    for (coords, e) in &result.failures {
        let _ = writeln!(s, "skipped v0={} n={}: {e}", coords.speed, coords.n_vehicles);
    }
    let _ = writeln!(s, "{} of {} cells exceed {:.1} m", result.violating_cells(), result.cells.len(), cfg.grid.d);
    Ok(s)
}

fn cmd_validate_calibration(path: &Path) -> Result<String, CliError> {
    let cal = calibration(Some(path))?;
    let (lo, hi) = cal.valid_range();
    let peak = cal.latency_peak();
    let peak_latency = cal.worst_case_latency(peak).expect("peak lies in range");
    Ok(format!(
        "ok: {} rows, n in [{lo}, {hi}], latency peak {peak_latency:.6} s at n={peak}\n",
        cal.rows().len()
    ))
}

fn cmd_export_net(a: &ExportNetArgs) -> Result<String, CliError> {
    let (config, channel) = scenario_inputs(&a.scenario)?;
    let net = build_scenario_net(&config, &channel)?;
    let text = render_net(&net)?;
    write(&a.output, text.as_bytes())?;
    Ok(format!(
        "wrote {} places, {} transitions to {}\n",
        net.places().len(),
        net.transitions().len(),
        a.output.display()
    ))
}
