//! Simulation and verification of the Apollonius-disc pursuit law.
//!
//! The guaranteed pursuer steers along
//! `z_P = (R_C - R_A) r_hat + nu y`, which keeps the evader's Apollonius disc
//! inside a fixed capture disc and forces capture in finite time. This crate
//! provides the geometry, the pursuer and evader control laws, a fixed-step
//! engine with runtime invariant monitors, the target-guarding and
//! final-location game analysis, and a reproduction of the two-wall
//! dispersal-surface chattering exploit.

// `!(x > 0.0)` is the NaN-rejecting form of a domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod games;
pub mod geometry;
pub mod scenario;
pub mod strategies;
pub mod suite;
pub mod two_target;

pub use error::{Error, Result};
pub use geometry::{
    apollonius_disc, capture_disc, coefficients, lyapunov_envelope, offsets,
    ApolloniusCoefficients, Disc, Offsets, SpeedRatio, Vec2,
};
pub use strategies::{EvaderStrategy, GameState, PursuerStrategy};

pub mod prelude {
    pub use crate::engine::{
        run, MonitorReport, Outcome, OutcomeKind, RunResult, SimConfig, TrajectoryRecord,
    };
    pub use crate::games::{TargetPrimitive, TargetSet, ValueField};
    pub use crate::geometry::{Disc, SpeedRatio, Vec2};
    pub use crate::strategies::{
        EvaderPolicy, EvaderStrategy, GameState, PursuerPolicy, PursuerStrategy,
    };
}
