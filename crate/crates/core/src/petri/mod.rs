//! Stochastic timed colored Petri net kernel.

pub mod color;
mod engine;
pub mod format;
mod net;
mod reach;

pub use color::{ColorExpr, ColorPredicate, Guard};
pub use engine::{Enabled, Firing, RunError, Stop, Trace};
pub use net::{
    build_net, InputArc, Marking, NetError, OutputArc, PetriNet, Place, PlaceIdx, Token,
    TransIdx, Transition, UntimedMarking,
};
pub use reach::StateBudgetExceeded;
