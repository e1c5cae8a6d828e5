//! Monte Carlo estimation of collision probability and sweeps over vehicle
//! count, speed, perception time and deceleration.
//!
//! Output is a pure function of the inputs and the base seed: trials and
//! cells run on the rayon pool, but results are always folded in index
//! order.

mod config;
mod export;
mod seed;
mod stats;

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{parse_sweep_config, SweepConfig};
pub use export::{export_results, format_sig, parse_results, render_parsed, write_plot, ExportRow, CSV_HEADER};
pub use seed::{cell_seed, mix64, split};
pub use stats::{wilson_interval, Z95};

use crate::channel::{Channel, ChannelError};
use crate::scenario::{Cause, Scenario, ScenarioConfig, ScenarioError, Verdict};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("sweep grid has an empty {0} list")]
    EmptyAxis(&'static str),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed results table: {0}")]
    Table(String),
}

/// Aggregate of `trials` independent scenario runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub trials: u64,
    pub collisions: u64,
    pub collision_probability: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_halfwidth: f64,
    pub mean_stop_distance: f64,
    pub first_cycle_direct_safe: u64,
    /// Indexed like [`Cause::ALL`].
    pub causes: [u64; 5],
}

impl Estimate {
    pub fn cause_count(&self, cause: Cause) -> u64 {
        self.causes[Cause::ALL.iter().position(|c| *c == cause).unwrap()]
    }

    pub fn direct_safe_frequency(&self) -> f64 {
        self.first_cycle_direct_safe as f64 / self.trials as f64
    }
}

struct Tally {
    collision: bool,
    cause: Cause,
    stop_distance: f64,
    direct_safe: bool,
}

/// Runs `n_trials` trials of one built scenario, trial `i` seeded with
/// `split(base_seed, i)`.
pub fn estimate(scenario: &Scenario, n_trials: u64, base_seed: u64) -> Result<Estimate, ExperimentError> {
    if n_trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    let tallies: Vec<Tally> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            scenario.run_trial(split(base_seed, i)).map(|o| Tally {
                collision: o.verdict == Verdict::Collision,
                cause: o.cause,
                stop_distance: o.stop_distance,
                direct_safe: o.first_cycle_direct_safe(),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut causes = [0u64; 5];
    let mut collisions = 0;
    let mut direct = 0;
    let mut distance_sum = 0.0;
    for t in &tallies {
        causes[Cause::ALL.iter().position(|c| *c == t.cause).unwrap()] += 1;
        collisions += u64::from(t.collision);
        direct += u64::from(t.direct_safe);
        distance_sum += t.stop_distance;
    }
    let (ci_low, ci_high) = wilson_interval(collisions, n_trials);
    Ok(Estimate {
        trials: n_trials,
        collisions,
        collision_probability: collisions as f64 / n_trials as f64,
        ci_low,
        ci_high,
        ci_halfwidth: (ci_high - ci_low) / 2.0,
        mean_stop_distance: distance_sum / n_trials as f64,
        first_cycle_direct_safe: direct,
        causes,
    })
}

pub fn monte_carlo(
    config: &ScenarioConfig,
    channel: &Channel,
    n_trials: u64,
    base_seed: u64,
) -> Result<Estimate, ExperimentError> {
    let scenario = Scenario::new(config, channel)?;
    estimate(&scenario, n_trials, base_seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub speeds: Vec<f64>,
    pub vehicle_counts: Vec<u32>,
    pub perception_times: Vec<f64>,
    pub decelerations: Vec<f64>,
    pub d: f64,
    pub trials_per_cell: u64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCoords {
    pub speed: f64,
    pub n_vehicles: u32,
    pub t_perception: f64,
    pub a: f64,
}

impl CellCoords {
    fn cmp_lex(&self, other: &Self) -> Ordering {
        self.speed
            .total_cmp(&other.speed)
            .then(self.n_vehicles.cmp(&other.n_vehicles))
            .then(self.t_perception.total_cmp(&other.t_perception))
            .then(self.a.total_cmp(&other.a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub coords: CellCoords,
    pub d: f64,
    /// Effective alarm latency used for the cell, seconds.
    pub latency_used: f64,
    pub loss_used: f64,
    pub estimate: Estimate,
    /// Mean stop distance exceeds `d`.
    pub violates_range: bool,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub cells: Vec<CellResult>,
    /// Cells that could not be evaluated, with the reason; the rest of the sweep still runs.
    pub failures: Vec<(CellCoords, ExperimentError)>,
}

impl SweepOutput {
    pub fn violating_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.violates_range).count()
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.speeds.is_empty() {
            return Err(ExperimentError::EmptyAxis("speeds"));
        }
        if self.vehicle_counts.is_empty() {
            return Err(ExperimentError::EmptyAxis("vehicle_counts"));
        }
        if self.perception_times.is_empty() {
            return Err(ExperimentError::EmptyAxis("perception_times"));
        }
        if self.decelerations.is_empty() {
            return Err(ExperimentError::EmptyAxis("decelerations"));
        }
        if self.trials_per_cell == 0 {
            return Err(ExperimentError::NoTrials);
        }
        Ok(())
    }

    /// Distinct cells in lexicographic (speed, n, t_perception, a) order.
    pub fn cells(&self) -> Vec<CellCoords> {
        let mut cells = Vec::new();
        for &speed in &self.speeds {
            for &n_vehicles in &self.vehicle_counts {
                for &t_perception in &self.perception_times {
                    for &a in &self.decelerations {
                        cells.push(CellCoords { speed, n_vehicles, t_perception, a });
                    }
                }
            }
        }
        cells.sort_by(CellCoords::cmp_lex);
        cells.dedup_by(|x, y| x.cmp_lex(y) == Ordering::Equal);
        cells
    }
}

fn run_cell(
    grid: &SweepGrid,
    template: &ScenarioConfig,
    channel: &Channel,
    coords: CellCoords,
) -> Result<CellResult, ExperimentError> {
    let mut config = *template;
    config.kinematics.v0 = coords.speed;
    config.kinematics.t_perception = coords.t_perception;
    config.kinematics.a = coords.a;
    config.kinematics.d = grid.d;
    config.n_vehicles = coords.n_vehicles;
    config.use_channel_model = true;
    let scenario = Scenario::new(&config, channel)?;
    let eff = *scenario.effective();
    let seed = cell_seed(grid.base_seed, coords.n_vehicles, coords.t_perception, coords.a);
    let estimate = estimate(&scenario, grid.trials_per_cell, seed)?;
    Ok(CellResult {
        coords,
        d: grid.d,
        latency_used: eff.kinematics.t_latency,
        loss_used: eff.probs.plp,
        violates_range: estimate.mean_stop_distance > grid.d,
        estimate,
    })
}

/// Evaluates every grid cell with latency and loss taken from the channel at
/// the cell's vehicle count. `template` supplies pppd, crp, K and the beacon.
pub fn sweep(grid: &SweepGrid, template: &ScenarioConfig, channel: &Channel) -> Result<SweepOutput, ExperimentError> {
    grid.validate()?;
    let results: Vec<(CellCoords, Result<CellResult, ExperimentError>)> = grid
        .cells()
        .into_par_iter()
        .map(|coords| (coords, run_cell(grid, template, channel, coords)))
        .collect();
    let mut out = SweepOutput { cells: Vec::new(), failures: Vec::new() };
    for (coords, r) in results {
        match r {
            Ok(cell) => out.cells.push(cell),
            Err(e) => out.failures.push((coords, e)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
