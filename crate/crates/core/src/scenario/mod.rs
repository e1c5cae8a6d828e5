//! Pedestrian-crossing warning scenario: the net, single trials and outcome
//! classification.

mod config;
mod net;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{parse_config, render_config, Effective, ScenarioConfig, ScenarioProbabilities};
pub use net::{delivery_latency, LossPattern, COLLISION, PLACES, SAFE, START};

use crate::channel::{Channel, ChannelError};
use crate::kinematics::{total_distance, KinematicsError};
use crate::petri::{Marking, NetError, PetriNet, PlaceIdx, RunError, Stop, Token, Trace, TransIdx};
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("probability {name} must lie in [0, 1] (got {value})")]
    Probability { name: &'static str, value: f64 },
    #[error("K must be ≥ 2 (got {0})")]
    Threshold(u32),
    #[error("vehicle count must be positive")]
    Vehicles,
    #[error("invalid scenario config: {0}")]
    ConfigParse(String),
    #[error("trial did not reach the safe or collision place: {0}")]
    Budget(#[from] RunError),
    #[error("unclassifiable trace: {0}")]
    Unclassifiable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Safe,
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cause {
    CorrectReaction,
    PedestrianCrossedDuringUnsafe,
    IncorrectReaction,
    PacketLossCascade,
    NoButtonPressAndNoRecovery,
}

impl Cause {
    pub const ALL: [Cause; 5] = [
        Cause::CorrectReaction,
        Cause::PedestrianCrossedDuringUnsafe,
        Cause::IncorrectReaction,
        Cause::PacketLossCascade,
        Cause::NoButtonPressAndNoRecovery,
    ];
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "SAFE",
            Verdict::Collision => "COLLISION",
        })
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    pub cause: Cause,
    /// First alarm sent to the alarm the driver received; the nominal latency
    /// when no alarm got through.
    pub alarm_latency_used: f64,
    /// Alarms lost before delivery or before the unsafe state was entered.
    pub losses: u32,
    pub stop_distance: f64,
    pub trace: Trace,
}

impl TrialOutcome {
    /// Button pressed, first alarm delivered, driver reacted correctly.
    pub fn first_cycle_direct_safe(&self) -> bool {
        self.cause == Cause::CorrectReaction && self.losses == 0
    }
}

struct Ids {
    t: [TransIdx; 15],
    safe: PlaceIdx,
    collision: PlaceIdx,
    start: PlaceIdx,
}

impl Ids {
    fn new(net: &PetriNet) -> Self {
        let t = std::array::from_fn(|i| net.trans_idx(&format!("T{i}")).expect("scenario transition"));
        Ids {
            t,
            safe: net.place_idx(SAFE).expect("safe place"),
            collision: net.place_idx(COLLISION).expect("collision place"),
            start: net.place_idx(START).expect("start place"),
        }
    }
}

/// A built scenario, shareable across threads; each trial only needs a seed.
pub struct Scenario {
    config: ScenarioConfig,
    effective: Effective,
    net: PetriNet,
    ids: Ids,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig, channel: &Channel) -> Result<Self, ScenarioError> {
        Self::with_loss_pattern(config, channel, LossPattern::Stochastic)
    }

    pub fn with_loss_pattern(
        config: &ScenarioConfig,
        channel: &Channel,
        pattern: LossPattern,
    ) -> Result<Self, ScenarioError> {
        let effective = config.effective(channel)?;
        let net = net::build(&effective, config.loss_to_collision_threshold, config.beacon.period, pattern)?;
        let ids = Ids::new(&net);
        Ok(Scenario { config: *config, effective, net, ids })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn effective(&self) -> &Effective {
        &self.effective
    }

    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    /// One pedestrian token in the initial place.
    pub fn initial_marking(&self) -> Marking {
        let mut m = Marking::empty(&self.net);
        m.put(self.ids.start, Token::new("ped", SimTime::ZERO).expect("non-empty color"));
        m
    }

    fn step_budget(&self) -> usize {
        // 4 firings to reach the first alarm, 4 per beacon, 4 to absorb
        16 + 4 * self.config.loss_to_collision_threshold as usize
    }

    /// Runs one crossing episode until the safe or collision place is marked.
    pub fn run_trial(&self, seed: u64) -> Result<TrialOutcome, ScenarioError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut marking = self.initial_marking();
        let (safe, collision) = (self.ids.safe, self.ids.collision);
        let stop = Stop::budget(self.step_budget()).when(move |m, _| m.count(safe) > 0 || m.count(collision) > 0);
        let trace = self.net.run(&mut marking, &mut rng, &stop)?;
        let (verdict, cause) = classify_trace(&self.net, &trace)?;

        let t = &self.ids.t;
        let first_send = trace.events.iter().find(|e| e.transition == t[4]).map(|e| e.time);
        let delivered = trace.events.iter().find(|e| e.transition == t[5]).map(|e| e.time);
        let losses = trace.fired().filter(|&x| x == t[6]).count() as u32;
        let alarm_latency_used = match (first_send, delivered) {
            (Some(s), Some(r)) => r.saturating_sub(s).as_secs_f64(),
            _ => self.effective.kinematics.t_latency,
        };
        let stop_distance = total_distance(&self.effective.kinematics.with_latency(alarm_latency_used))?.x_total;
        Ok(TrialOutcome { verdict, cause, alarm_latency_used, losses, stop_distance, trace })
    }
}

pub fn build_scenario_net(config: &ScenarioConfig, channel: &Channel) -> Result<PetriNet, ScenarioError> {
    Ok(Scenario::new(config, channel)?.net)
}

pub fn run_trial(config: &ScenarioConfig, channel: &Channel, seed: u64) -> Result<TrialOutcome, ScenarioError> {
    Scenario::new(config, channel)?.run_trial(seed)
}

/// Maps the absorbing firing of the last episode, plus the path that led to
/// it, to a verdict and cause.
pub fn classify_trace(net: &PetriNet, trace: &Trace) -> Result<(Verdict, Cause), ScenarioError> {
    let id = |t: TransIdx| net.transition(t).id.as_str();
    let last = trace.last().ok_or_else(|| ScenarioError::Unclassifiable("empty trace".into()))?;
    let episode_start = trace.events.iter().rposition(|e| id(e.transition) == "T0").unwrap_or(0);
    let episode = &trace.events[episode_start..];
    let took = |tid: &str| episode.iter().any(|e| id(e.transition) == tid);
    match id(last.transition) {
        "T9" => Ok((Verdict::Safe, Cause::CorrectReaction)),
        "T13" => Ok((Verdict::Safe, Cause::PedestrianCrossedDuringUnsafe)),
        "T11" => Ok((Verdict::Collision, Cause::IncorrectReaction)),
        "T12" if took("T8") => Ok((Verdict::Collision, Cause::PacketLossCascade)),
        "T12" if took("T2") => Ok((Verdict::Collision, Cause::NoButtonPressAndNoRecovery)),
        other => Err(ScenarioError::Unclassifiable(format!("trace ends with {other}"))),
    }
}

#[cfg(test)]
mod tests;
