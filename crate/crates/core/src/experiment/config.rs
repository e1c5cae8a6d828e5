//! Sweep configuration file (TOML, `format = "sweep-config"`, `version = 1`).
//!
//! ```toml
//! format = "sweep-config"
//! version = 1
//! speeds = [10.0, 15.0, 20.0]
//! vehicle_counts = [5, 27, 57, 138]
//! perception_times = [1.0]
//! decelerations = [4.0]
//! d = 200.0
//! trials_per_cell = 1000
//! base_seed = 1
//!
//! [scenario]
//! pppd = 0.95
//! crp = 0.95
//! loss_to_collision_threshold = 3
//!
//! [beacon]
//! period = 0.1
//! packet_size = 2048
//! ```

use serde::Deserialize;

use super::{ExperimentError, SweepGrid};
use crate::channel::BeaconConfig;
use crate::scenario::{ScenarioConfig, ScenarioProbabilities};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    /// Kinematic fields, vehicle count and plp are overwritten per cell.
    pub template: ScenarioConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    format: String,
    version: u32,
    speeds: Vec<f64>,
    vehicle_counts: Vec<u32>,
    #[serde(default = "one_second")]
    perception_times: Vec<f64>,
    #[serde(default = "wet_road")]
    decelerations: Vec<f64>,
    #[serde(default = "warning_range")]
    d: f64,
    trials_per_cell: u64,
    #[serde(default)]
    base_seed: u64,
    #[serde(default)]
    scenario: ScenarioDoc,
    #[serde(default)]
    beacon: BeaconDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScenarioDoc {
    pppd: f64,
    crp: f64,
    loss_to_collision_threshold: u32,
}

impl Default for ScenarioDoc {
    fn default() -> Self {
        let c = ScenarioConfig::default();
        ScenarioDoc { pppd: c.probs.pppd, crp: c.probs.crp, loss_to_collision_threshold: c.loss_to_collision_threshold }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BeaconDoc {
    period: f64,
    packet_size: u32,
}

impl Default for BeaconDoc {
    fn default() -> Self {
        let b = BeaconConfig::default();
        BeaconDoc { period: b.period, packet_size: b.packet_size }
    }
}

fn one_second() -> Vec<f64> {
    vec![1.0]
}

fn wet_road() -> Vec<f64> {
    vec![4.0]
}

fn warning_range() -> f64 {
    200.0
}

pub fn parse_sweep_config(text: &str) -> Result<SweepConfig, ExperimentError> {
    let doc: Doc = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
    if doc.format != "sweep-config" || doc.version != 1 {
        return Err(ExperimentError::Config(format!(
            "unsupported header {:?} version {}",
            doc.format, doc.version
        )));
    }
    let grid = SweepGrid {
        speeds: doc.speeds,
        vehicle_counts: doc.vehicle_counts,
        perception_times: doc.perception_times,
        decelerations: doc.decelerations,
        d: doc.d,
        trials_per_cell: doc.trials_per_cell,
        base_seed: doc.base_seed,
    };
    grid.validate()?;
    let defaults = ScenarioConfig::default();
    let template = ScenarioConfig {
        probs: ScenarioProbabilities { pppd: doc.scenario.pppd, crp: doc.scenario.crp, ..defaults.probs },
        beacon: BeaconConfig { period: doc.beacon.period, packet_size: doc.beacon.packet_size },
        loss_to_collision_threshold: doc.scenario.loss_to_collision_threshold,
        use_channel_model: true,
        ..defaults
    };
    // Fail on template errors now rather than once per cell.
    template.validate()?;
    for &n in &grid.vehicle_counts {
        if n == 0 {
            return Err(ExperimentError::Config("vehicle counts must be positive".into()));
        }
    }
    for (&v, &tp, &a) in kinematic_combinations(&grid) {
        let mut k = template.kinematics;
        k.v0 = v;
        k.t_perception = tp;
        k.a = a;
        k.d = grid.d;
        k.validate().map_err(crate::scenario::ScenarioError::from)?;
    }
    Ok(SweepConfig { grid, template })
}

fn kinematic_combinations(grid: &SweepGrid) -> Vec<(&f64, &f64, &f64)> {
    let mut out = Vec::new();
    for v in &grid.speeds {
        for tp in &grid.perception_times {
            for a in &grid.decelerations {
                out.push((v, tp, a));
            }
        }
    }
    out
}
