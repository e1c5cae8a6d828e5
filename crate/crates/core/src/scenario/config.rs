//! Scenario configuration and its TOML file form.

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::channel::{BeaconConfig, Channel};
use crate::kinematics::KinematicsParams;

pub const CONFIG_FORMAT: &str = "scenario-config";
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioProbabilities {
    /// Pedestrian presence detected (button pressed).
    pub pppd: f64,
    /// Packet loss per alarm.
    pub plp: f64,
    /// Driver reacts correctly.
    pub crp: f64,
}

impl Default for ScenarioProbabilities {
    fn default() -> Self {
        ScenarioProbabilities { pppd: 0.95, plp: 0.10, crp: 0.95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub kinematics: KinematicsParams,
    pub probs: ScenarioProbabilities,
    pub n_vehicles: u32,
    pub beacon: BeaconConfig,
    /// Consecutive lost alarms after which the unsafe state may end in a collision.
    pub loss_to_collision_threshold: u32,
    /// Derive `plp` and `t_latency` from the channel at `n_vehicles`.
    pub use_channel_model: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            kinematics: KinematicsParams { v0: 20.0, t_latency: 0.1, t_perception: 1.0, a: 4.0, d: 200.0 },
            probs: ScenarioProbabilities::default(),
            n_vehicles: 5,
            beacon: BeaconConfig::default(),
            loss_to_collision_threshold: 3,
            use_channel_model: false,
        }
    }
}

/// The latency and loss a trial actually runs with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effective {
    pub kinematics: KinematicsParams,
    pub probs: ScenarioProbabilities,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.kinematics.validate()?;
        for (name, p) in [("pppd", self.probs.pppd), ("plp", self.probs.plp), ("crp", self.probs.crp)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScenarioError::Probability { name, value: p });
            }
        }
        if self.loss_to_collision_threshold < 2 {
            return Err(ScenarioError::Threshold(self.loss_to_collision_threshold));
        }
        if self.n_vehicles == 0 {
            return Err(ScenarioError::Vehicles);
        }
        self.beacon.validate()?;
        Ok(())
    }

    /// Validates and, when the channel model is on, replaces `t_latency` with
    /// the pessimistic effective latency and `plp` with the calibrated loss.
    pub fn effective(&self, channel: &Channel) -> Result<Effective, ScenarioError> {
        self.validate()?;
        if !self.use_channel_model {
            return Ok(Effective { kinematics: self.kinematics, probs: self.probs });
        }
        let latency = channel.calibration.pessimistic_latency(&channel.schedule, self.n_vehicles)?;
        let plp = channel.calibration.packet_loss_probability(self.n_vehicles)?;
        Ok(Effective {
            kinematics: self.kinematics.with_latency(latency),
            probs: ScenarioProbabilities { plp, ..self.probs },
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    format: String,
    version: u32,
    #[serde(default = "defaults::n_vehicles")]
    n_vehicles: u32,
    #[serde(default = "defaults::threshold")]
    loss_to_collision_threshold: u32,
    #[serde(default)]
    use_channel_model: bool,
    #[serde(default = "defaults::kinematics")]
    kinematics: KinematicsDoc,
    #[serde(default)]
    probabilities: ScenarioProbabilities,
    #[serde(default)]
    beacon: BeaconDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KinematicsDoc {
    v0: f64,
    t_latency: f64,
    t_perception: f64,
    a: f64,
    d: f64,
}

#[derive(Debug, Serialize, Deserialize)]
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

mod defaults {
    use super::*;

    pub fn n_vehicles() -> u32 {
        ScenarioConfig::default().n_vehicles
    }

    pub fn threshold() -> u32 {
        ScenarioConfig::default().loss_to_collision_threshold
    }

    pub fn kinematics() -> KinematicsDoc {
        let k = ScenarioConfig::default().kinematics;
        KinematicsDoc { v0: k.v0, t_latency: k.t_latency, t_perception: k.t_perception, a: k.a, d: k.d }
    }
}

/// Parses and validates a scenario config document. Missing keys take their
/// defaults; unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| ScenarioError::ConfigParse(e.to_string()))?;
    if doc.format != CONFIG_FORMAT || doc.version != CONFIG_VERSION {
        return Err(ScenarioError::ConfigParse(format!(
            "unsupported header {:?} version {}",
            doc.format, doc.version
        )));
    }
    let k = doc.kinematics;
    let config = ScenarioConfig {
        kinematics: KinematicsParams { v0: k.v0, t_latency: k.t_latency, t_perception: k.t_perception, a: k.a, d: k.d },
        probs: doc.probabilities,
        n_vehicles: doc.n_vehicles,
        beacon: BeaconConfig { period: doc.beacon.period, packet_size: doc.beacon.packet_size },
        loss_to_collision_threshold: doc.loss_to_collision_threshold,
        use_channel_model: doc.use_channel_model,
    };
    config.validate()?;
    Ok(config)
}

pub fn render_config(config: &ScenarioConfig) -> String {
    let k = config.kinematics;
    let doc = ConfigDoc {
        format: CONFIG_FORMAT.into(),
        version: CONFIG_VERSION,
        n_vehicles: config.n_vehicles,
        loss_to_collision_threshold: config.loss_to_collision_threshold,
        use_channel_model: config.use_channel_model,
        kinematics: KinematicsDoc { v0: k.v0, t_latency: k.t_latency, t_perception: k.t_perception, a: k.a, d: k.d },
        probabilities: config.probs,
        beacon: BeaconDoc { period: config.beacon.period, packet_size: config.beacon.packet_size },
    };
    toml::to_string(&doc).expect("config serializes")
}
