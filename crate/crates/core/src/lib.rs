//! Interference-aware path planning for mobile robots served by a
//! multi-cell mmWave network.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds the hexagonal cell layout, beam sectors, mutually
//!   interfering beam pairs, node sampling and travel times.
//! * [`radio`] is the downlink link model (gain, path loss, fading, SINR, rate).
//! * [`instance`] ties nodes, windows and the collision matrix together and
//!   owns the JSON instance format.
//! * [`model`] emits the collision-unaware and collision-aware MILPs and
//!   exports them as LP text.
//! * [`solver`] solves those models exactly by branch-and-bound, carries a
//!   brute-force oracle and an independent schedule validator.
//! * [`simulation`] replays schedules through the radio model and runs the
//!   Monte Carlo experiments.

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod instance;
pub mod model;
pub mod parallel;
pub mod radio;
pub mod seed;
pub mod simulation;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{BeamRef, CellLayout, Point};
pub use instance::{CollisionMatrix, Instance, Node, NodeSet, Scenario};
pub use model::{MilpModel, Variant};
pub use radio::RadioParams;
pub use solver::{Solution, SolveLimits, SolveStatus};

/// Feasibility tolerance on every time comparison, in seconds.
pub const TIME_TOL: f64 = 1e-6;

/// Version tag written into every JSON document the crate produces.
pub const SCHEMA_VERSION: u32 = 1;
