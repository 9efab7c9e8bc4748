//! Stein variational uncertainty-adaptive model predictive control.
//!
//! A set of latent-parameter particles is moved by SVGD toward a
//! task-dependent posterior built from the optimality gap of the current plan,
//! and a sampling-based MPC minimizes a gap-weighted robust objective over
//! those particles. Ensemble, distributionally robust and nominal planners
//! share the same sampler and harness as baselines.
//!
//! Modules:
//! - [`inference`]: kernels, particle sets, the SVGD update and the KSD.
//! - [`envs`]: cartpole, planar rocket and race car dynamics with RK4.
//! - [`cost`]: quadratic costs, shooting objective, gap, robust and DRO costs.
//! - [`control`]: control plans, the path-integral sampler, planner variants.
//! - [`harness`]: the closed loop, success tests and seeded batches.
//!
//! With the default `parallel` feature, rollouts inside the sampler and trials
//! inside a batch fan out over rayon. Results are bitwise identical with the
//! feature disabled or with any thread count.

pub mod control;
pub mod cost;
pub mod envs;
mod error;
pub mod exec;
pub mod harness;
pub mod inference;

pub use error::{Error, Result};
