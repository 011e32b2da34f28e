//! Minimum-time escape of a constant-speed, turn-rate-limited vehicle from a
//! circular region: closed-form strategy synthesis, closed-loop simulation,
//! retrograde characteristics, brute-force verification and strategy atlases.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod characteristics;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod oracle;
pub mod output;
pub mod strategy;

pub use error::{EscapeError, Result};
pub use geometry::{PlanarPoint, ScaledState, VehicleConfig};
pub use strategy::{classify, solve, solve_scaled, StrategyDecision, StrategyTag};
