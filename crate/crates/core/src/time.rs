//! Fixed-point simulated time.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MICROS_PER_SEC: f64 = 1_000_000.0;

/// Simulated time in whole microseconds.
///
/// Clock comparisons inside the engine are exact integer comparisons, so two
/// runs with the same seed produce identical traces regardless of how the
/// delays were written down.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(u64);

#[derive(Debug, Clone, PartialEq, Error)]
#[error("time must be finite and non-negative, got {0}")]
pub struct InvalidTime(pub f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    /// Rounds to the nearest microsecond.
    pub fn from_secs_f64(secs: f64) -> Result<Self, InvalidTime> {
        if !secs.is_finite() || secs < 0.0 {
            return Err(InvalidTime(secs));
        }
        let us = (secs * MICROS_PER_SEC).round();
        if us >= u64::MAX as f64 {
            return Err(InvalidTime(secs));
        }
        Ok(SimTime(us as u64))
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_add(rhs.0).expect("simulated time overflow"))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}
