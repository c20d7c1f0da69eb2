//! Sampling-based model predictive control with tensor sampling.
//!
//! Control trajectories are drawn by picking one waypoint per layer of a random
//! multipartite graph and interpolating the result (linear, B-spline, or Akima),
//! then mixed with local Gaussian samples around a nominal trajectory and
//! refined with a softmax-weighted elite update. Reference CEM, MPPI, and
//! predictive-sampling planners share the same rollout engine.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod diagnostics;
pub mod env;
mod error;
pub mod planner;
pub mod rollout;
pub mod spline;
pub mod tensor;
mod types;

pub use baselines::{BaselineKind, CemPlanner, MppiPlanner, PsPlanner};
pub use env::{Environment, Randomizable};
pub use error::{Error, Result};
pub use planner::{MtpPlanner, PlanOutput, Planner, PlannerConfig, StepDiagnostics};
pub use spline::Interpolation;
pub use types::{ControlLimits, ControlTrajectoryBatch, GaussianControlDistribution};

/// RNG used by every planner and sampler in this crate.
pub type PlannerRng = rand_chacha::ChaCha8Rng;
