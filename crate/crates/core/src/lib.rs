//! Timed stochastic Petri net engine and a safety analysis of periodic
//! pedestrian-crossing warnings delivered over an 802.11p channel.
//!
//! - [`petri`]: the generic net kernel (timed firing, weighted conflicts,
//!   reachability oracle, file formats)
//! - [`kinematics`]: stopping distances and the collision predicate
//! - [`channel`]: CCH/SCH schedule and calibrated latency/loss
//! - [`scenario`]: the crossing net and single trials
//! - [`experiment`]: Monte Carlo estimation, sweeps, CSV/SVG export
//! - [`cli`]: the `vanet-safety` command line

pub mod channel;
pub mod cli;
pub mod experiment;
pub mod kinematics;
pub mod petri;
pub mod scenario;
pub mod time;

pub use time::SimTime;
