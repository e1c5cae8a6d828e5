//! Stopping-distance model: a constant-speed warning leg, a constant-speed
//! perception leg and a constant-deceleration brake leg.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("speed must be finite and non-negative")]
    Speed,
    #[error("latency must be finite and non-negative")]
    Latency,
    #[error("perception time must be finite and non-negative")]
    Perception,
    #[error("deceleration must be positive")]
    Deceleration,
    #[error("distance must be positive")]
    Distance,
}

/// Typical perception-reaction range, seconds.
pub const PERCEPTION_RANGE: (f64, f64) = (0.7, 1.5);
/// Braking deceleration on a dry road, m/s².
pub const DECEL_DRY: f64 = 9.0;
/// Braking deceleration on a wet road, m/s².
pub const DECEL_WET: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicsParams {
    /// Vehicle speed, m/s.
    pub v0: f64,
    /// Alarm delivery latency, s.
    pub t_latency: f64,
    /// Driver perception-reaction time, s.
    pub t_perception: f64,
    /// Braking deceleration magnitude, m/s².
    pub a: f64,
    /// Vehicle to pedestrian distance when the pedestrian enters the road, m.
    pub d: f64,
}

impl KinematicsParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        non_negative(self.v0, KinematicsError::Speed)?;
        non_negative(self.t_latency, KinematicsError::Latency)?;
        non_negative(self.t_perception, KinematicsError::Perception)?;
        positive(self.a, KinematicsError::Deceleration)?;
        positive(self.d, KinematicsError::Distance)
    }

    pub fn with_latency(self, t_latency: f64) -> Self {
        KinematicsParams { t_latency, ..self }
    }

    pub fn with_speed(self, v0: f64) -> Self {
        KinematicsParams { v0, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBreakdown {
    pub x_warning: f64,
    pub x_perception: f64,
    pub x_brake: f64,
    pub x_total: f64,
}

fn non_negative(x: f64, err: KinematicsError) -> Result<(), KinematicsError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(err)
    }
}

fn positive(x: f64, err: KinematicsError) -> Result<(), KinematicsError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(err)
    }
}

/// Distance covered while the alarm is in flight.
pub fn warning_distance(v0: f64, t_latency: f64) -> Result<f64, KinematicsError> {
    non_negative(v0, KinematicsError::Speed)?;
    non_negative(t_latency, KinematicsError::Latency)?;
    Ok(v0 * t_latency)
}

/// Distance covered between alarm reception and the start of braking.
pub fn perception_distance(v0: f64, t_perception: f64) -> Result<f64, KinematicsError> {
    non_negative(v0, KinematicsError::Speed)?;
    non_negative(t_perception, KinematicsError::Perception)?;
    Ok(v0 * t_perception)
}

pub fn brake_distance(v0: f64, a: f64) -> Result<f64, KinematicsError> {
    non_negative(v0, KinematicsError::Speed)?;
    positive(a, KinematicsError::Deceleration)?;
    Ok(v0 * v0 / (2.0 * a))
}

pub fn total_distance(params: &KinematicsParams) -> Result<DistanceBreakdown, KinematicsError> {
    params.validate()?;
    let x_warning = warning_distance(params.v0, params.t_latency)?;
    let x_perception = perception_distance(params.v0, params.t_perception)?;
    let x_brake = brake_distance(params.v0, params.a)?;
    Ok(DistanceBreakdown { x_warning, x_perception, x_brake, x_total: x_warning + x_perception + x_brake })
}

/// True when the remaining distance after the full stop is strictly negative.
/// Stopping exactly at the pedestrian is not a collision.
pub fn collision_occurs(params: &KinematicsParams) -> Result<bool, KinematicsError> {
    let b = total_distance(params)?;
    Ok(params.d - b.x_total < 0.0)
}

fn check_threshold_inputs(d: f64, t_latency: f64, t_perception: f64, a: f64) -> Result<(), KinematicsError> {
    positive(d, KinematicsError::Distance)?;
    non_negative(t_latency, KinematicsError::Latency)?;
    non_negative(t_perception, KinematicsError::Perception)?;
    positive(a, KinematicsError::Deceleration)
}

fn stops_in_time(v: f64, d: f64, t_latency: f64, t_perception: f64, a: f64) -> bool {
    let x = v * t_latency + v * t_perception + v * v / (2.0 * a);
    d - x >= 0.0
}

/// The largest speed at which the vehicle still stops within `d`.
///
/// Positive root of `v²/2a + (t_perception + t_latency)·v − d = 0`, written in
/// the cancellation-free form `2d / (T + √(T² + 2d/a))`, then stepped down by
/// ulps until the (floating point) stopping test holds at the returned value.
pub fn critical_speed(d: f64, t_latency: f64, t_perception: f64, a: f64) -> Result<f64, KinematicsError> {
    check_threshold_inputs(d, t_latency, t_perception, a)?;
    let reaction = t_perception + t_latency;
    let mut v = 2.0 * d / (reaction + (reaction * reaction + 2.0 * d / a).sqrt());
    while v > 0.0 && !stops_in_time(v, d, t_latency, t_perception, a) {
        v = v.next_down();
    }
    Ok(v)
}

/// Bisection on the stopping test; slower but independent of the closed form.
pub fn critical_speed_bisection(
    d: f64,
    t_latency: f64,
    t_perception: f64,
    a: f64,
) -> Result<f64, KinematicsError> {
    check_threshold_inputs(d, t_latency, t_perception, a)?;
    // brake-only speed bounds the root from above
    let (mut lo, mut hi) = (0.0_f64, (2.0 * a * d).sqrt() + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stops_in_time(mid, d, t_latency, t_perception, a) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
