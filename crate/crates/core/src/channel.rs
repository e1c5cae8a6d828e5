//! Surrogate of the 802.11p / 1609.4 channel seen by a safety beacon.
//!
//! Three pieces: the alternating control/service channel schedule, a
//! vehicle-count-indexed table of worst-case latency and loss probability,
//! and the beacon configuration. Latency and loss come from a calibration
//! table because the shape of the curves is known but their magnitudes are
//! not; see `data/default_calibration.txt`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CALIBRATION_HEADER: &str = "vanet-calibration v1";

const DEFAULT_TABLE: &str = include_str!("../data/default_calibration.txt");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("calibration document is empty")]
    Empty,
    #[error("{row}: vehicle counts must be strictly increasing")]
    NotIncreasing { row: String },
    #[error("{row}: vehicle count outside the supported range {min}..={max}")]
    OutOfBounds { row: String, min: u32, max: u32 },
    #[error("{row}: {message}")]
    InvalidValue { row: String, message: String },
    #[error("{row}: loss probability decreases as the vehicle count grows")]
    LossDecreasing { row: String },
    #[error("{row}: worst-case latency is not unimodal with its peak at the row nearest n = {peak}")]
    LatencyNotUnimodal { row: String, peak: u32 },
    #[error("vehicle count {n} outside calibrated range {min}..={max}")]
    OutOfRange { n: u32, min: u32, max: u32 },
    #[error("channel intervals must be at least one microsecond")]
    Interval,
    #[error("send time must be finite and non-negative")]
    SendTime,
    #[error("beacon period and packet size must be positive")]
    Beacon,
}

/// Alternating CCH/SCH slots, CCH first from `epoch_start`. Windows are
/// half-open, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSchedule {
    cch_us: u64,
    sch_us: u64,
    epoch_us: u64,
}

impl Default for ChannelSchedule {
    fn default() -> Self {
        ChannelSchedule { cch_us: 50_000, sch_us: 50_000, epoch_us: 0 }
    }
}

fn secs_to_us(s: f64) -> Option<u64> {
    (s.is_finite() && s >= 0.0).then(|| (s * 1e6).round() as u64)
}

impl ChannelSchedule {
    pub fn new(cch_interval: f64, sch_interval: f64, epoch_start: f64) -> Result<Self, ChannelError> {
        let cch_us = secs_to_us(cch_interval).filter(|&u| u > 0).ok_or(ChannelError::Interval)?;
        let sch_us = secs_to_us(sch_interval).filter(|&u| u > 0).ok_or(ChannelError::Interval)?;
        let epoch_us = secs_to_us(epoch_start).ok_or(ChannelError::SendTime)?;
        Ok(ChannelSchedule { cch_us, sch_us, epoch_us })
    }

    pub fn cch_interval(&self) -> f64 {
        self.cch_us as f64 / 1e6
    }

    pub fn sch_interval(&self) -> f64 {
        self.sch_us as f64 / 1e6
    }

    pub fn epoch_start(&self) -> f64 {
        self.epoch_us as f64 / 1e6
    }

    pub fn period(&self) -> f64 {
        (self.cch_us + self.sch_us) as f64 / 1e6
    }

    /// The send instant with the longest CCH wait: the first instant of an SCH slot.
    pub fn worst_send_time(&self) -> f64 {
        (self.epoch_us + self.cch_us) as f64 / 1e6
    }
}

/// Time a safety message sent at `t` waits for the next CCH slot, at 1 µs
/// resolution. Zero inside a CCH slot.
///
/// # Panics
/// If `t` is not finite.
pub fn cch_wait(t: f64, sched: &ChannelSchedule) -> f64 {
    assert!(t.is_finite(), "send time must be finite");
    let t_us = (t * 1e6).round() as i128;
    let period = (sched.cch_us + sched.sch_us) as i128;
    let phase = (t_us - sched.epoch_us as i128).rem_euclid(period);
    if phase < sched.cch_us as i128 {
        0.0
    } else {
        (period - phase) as f64 / 1e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub n_vehicles: u32,
    /// Seconds.
    pub worst_latency: f64,
    pub loss_prob: f64,
}

/// Bounds and peak location every calibration must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeConstraints {
    pub n_min: u32,
    pub n_max: u32,
    /// The latency maximum must sit at the row nearest this vehicle count.
    pub latency_peak: u32,
}

impl Default for ShapeConstraints {
    fn default() -> Self {
        ShapeConstraints { n_min: 5, n_max: 138, latency_peak: 57 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCalibration {
    rows: Vec<CalibrationRow>,
}

fn row_label(row: &CalibrationRow, line: Option<usize>) -> String {
    match line {
        Some(l) => format!("row n={} (line {l})", row.n_vehicles),
        None => format!("row n={}", row.n_vehicles),
    }
}

impl ChannelCalibration {
    pub fn new(rows: Vec<CalibrationRow>, shape: &ShapeConstraints) -> Result<Self, ChannelError> {
        Self::validated(rows, None, shape)
    }

    /// The shipped table. Its magnitudes are placeholders; only its shape is meaningful.
    pub fn placeholder() -> Self {
        load_calibration(DEFAULT_TABLE).expect("shipped calibration is valid")
    }

    pub fn placeholder_document() -> &'static str {
        DEFAULT_TABLE
    }

    fn validated(
        rows: Vec<CalibrationRow>,
        lines: Option<&[usize]>,
        shape: &ShapeConstraints,
    ) -> Result<Self, ChannelError> {
        if rows.is_empty() {
            return Err(ChannelError::Empty);
        }
        let label = |i: usize| row_label(&rows[i], lines.map(|l| l[i]));
        for (i, r) in rows.iter().enumerate() {
            if r.n_vehicles < shape.n_min || r.n_vehicles > shape.n_max {
                return Err(ChannelError::OutOfBounds { row: label(i), min: shape.n_min, max: shape.n_max });
            }
            if !(r.worst_latency.is_finite() && r.worst_latency >= 0.0) {
                return Err(ChannelError::InvalidValue {
                    row: label(i),
                    message: "latency must be finite and non-negative".into(),
                });
            }
            if !(0.0..=1.0).contains(&r.loss_prob) {
                return Err(ChannelError::InvalidValue {
                    row: label(i),
                    message: "loss probability must lie in [0, 1]".into(),
                });
            }
            if i > 0 {
                if r.n_vehicles <= rows[i - 1].n_vehicles {
                    return Err(ChannelError::NotIncreasing { row: label(i) });
                }
                if r.loss_prob < rows[i - 1].loss_prob {
                    return Err(ChannelError::LossDecreasing { row: label(i) });
                }
            }
        }
        let peak = nearest_row(&rows, shape.latency_peak);
        for i in 1..rows.len() {
            let rising = i <= peak;
            let ok = if rising {
                rows[i].worst_latency >= rows[i - 1].worst_latency
            } else {
                rows[i].worst_latency <= rows[i - 1].worst_latency
            };
            if !ok {
                return Err(ChannelError::LatencyNotUnimodal { row: label(i), peak: shape.latency_peak });
            }
        }
        Ok(ChannelCalibration { rows })
    }

    pub fn rows(&self) -> &[CalibrationRow] {
        &self.rows
    }

    pub fn valid_range(&self) -> (u32, u32) {
        (self.rows[0].n_vehicles, self.rows[self.rows.len() - 1].n_vehicles)
    }

    /// Vehicle count of the row with the largest worst-case latency (first on ties).
    pub fn latency_peak(&self) -> u32 {
        let mut best = &self.rows[0];
        for r in &self.rows[1..] {
            if r.worst_latency > best.worst_latency {
                best = r;
            }
        }
        best.n_vehicles
    }

    fn interpolate(&self, n: u32, value: impl Fn(&CalibrationRow) -> f64) -> Result<f64, ChannelError> {
        let (min, max) = self.valid_range();
        if n < min || n > max {
            return Err(ChannelError::OutOfRange { n, min, max });
        }
        let hi = self.rows.partition_point(|r| r.n_vehicles < n);
        let upper = &self.rows[hi];
        if upper.n_vehicles == n {
            return Ok(value(upper));
        }
        let lower = &self.rows[hi - 1];
        let frac = f64::from(n - lower.n_vehicles) / f64::from(upper.n_vehicles - lower.n_vehicles);
        Ok(value(lower) + frac * (value(upper) - value(lower)))
    }

    /// Worst-case MAC/PHY latency at `n` vehicles, linearly interpolated.
    pub fn worst_case_latency(&self, n: u32) -> Result<f64, ChannelError> {
        self.interpolate(n, |r| r.worst_latency)
    }

    pub fn packet_loss_probability(&self, n: u32) -> Result<f64, ChannelError> {
        Ok(self.interpolate(n, |r| r.loss_prob)?.clamp(0.0, 1.0))
    }

    /// CCH wait at `t_send` plus the worst-case latency at `n`.
    pub fn effective_latency(
        &self,
        sched: &ChannelSchedule,
        n: u32,
        t_send: f64,
    ) -> Result<f64, ChannelError> {
        if !(t_send.is_finite() && t_send >= 0.0) {
            return Err(ChannelError::SendTime);
        }
        Ok(cch_wait(t_send, sched) + self.worst_case_latency(n)?)
    }

    /// Effective latency for an alarm raised at the worst instant of the schedule.
    pub fn pessimistic_latency(&self, sched: &ChannelSchedule, n: u32) -> Result<f64, ChannelError> {
        self.effective_latency(sched, n, sched.worst_send_time())
    }

    pub fn render(&self) -> String {
        let mut out = format!("{CALIBRATION_HEADER}\n# n_vehicles, worst_latency_seconds, loss_probability\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}, {}, {}", r.n_vehicles, r.worst_latency, r.loss_prob);
        }
        out
    }
}

/// Index of the row whose vehicle count is nearest `n` (lower count on ties).
fn nearest_row(rows: &[CalibrationRow], n: u32) -> usize {
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.n_vehicles.abs_diff(n) < rows[best].n_vehicles.abs_diff(n) {
            best = i;
        }
    }
    best
}

pub fn load_calibration(document: &str) -> Result<ChannelCalibration, ChannelError> {
    load_calibration_with(document, &ShapeConstraints::default())
}

pub fn load_calibration_with(
    document: &str,
    shape: &ShapeConstraints,
) -> Result<ChannelCalibration, ChannelError> {
    let mut header_seen = false;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in document.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != CALIBRATION_HEADER {
                return Err(ChannelError::Parse {
                    line: line_no,
                    message: format!("expected header {CALIBRATION_HEADER:?}"),
                });
            }
            header_seen = true;
            continue;
        }
        let content = line.split('#').next().unwrap_or("").trim();
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ChannelError::Parse {
                line: line_no,
                message: format!("expected 3 comma-separated fields, found {}", fields.len()),
            });
        }
        let parse_err = |what: &str, v: &str| ChannelError::Parse {
            line: line_no,
            message: format!("invalid {what} {v:?}"),
        };
        let n_vehicles = fields[0].parse::<u32>().map_err(|_| parse_err("vehicle count", fields[0]))?;
        let worst_latency = fields[1].parse::<f64>().map_err(|_| parse_err("latency", fields[1]))?;
        let loss_prob = fields[2].parse::<f64>().map_err(|_| parse_err("loss probability", fields[2]))?;
        rows.push(CalibrationRow { n_vehicles, worst_latency, loss_prob });
        lines.push(line_no);
    }
    if !header_seen {
        return Err(ChannelError::Parse { line: document.lines().count().max(1), message: "missing header".into() });
    }
    if rows.is_empty() {
        return Err(ChannelError::Parse { line: document.lines().count().max(1), message: "no calibration rows".into() });
    }
    ChannelCalibration::validated(rows, Some(&lines), shape)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeaconConfig {
    /// Seconds between beacons.
    pub period: f64,
    /// Bits.
    pub packet_size: u32,
}

impl Default for BeaconConfig {
    fn default() -> Self {
        BeaconConfig { period: 0.100, packet_size: 2048 }
    }
}

impl BeaconConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.period.is_finite() && self.period > 0.0 && self.packet_size > 0 {
            Ok(())
        } else {
            Err(ChannelError::Beacon)
        }
    }
}

/// Calibration plus schedule, the channel context a scenario is evaluated in.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub calibration: ChannelCalibration,
    pub schedule: ChannelSchedule,
}

impl Default for Channel {
    fn default() -> Self {
        Channel { calibration: ChannelCalibration::placeholder(), schedule: ChannelSchedule::default() }
    }
}
