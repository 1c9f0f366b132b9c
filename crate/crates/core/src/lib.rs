//! Solver library for multistage stochastic convex programs.
//!
//! The method keeps polyhedral lower models (bundles of affine cuts) of
//! three families of convex functions: stage objectives, stage constraints,
//! and cost-to-go functions. It refines all of them along sampled forward
//! passes. Every subproblem it solves is a small linear program, handled by
//! the built-in primal-dual interior-point solver in [`lpcore`]. Cost-to-go
//! cuts are aggregated from exactly-feasible dual certificates, so they stay
//! valid lower bounds even when subproblems are solved loosely.
//!
//! Modules:
//! - [`model`]: problem definition (convex oracles, boxes, per-stage noise).
//! - [`lpcore`]: dense LP solver with dual-certificate repair.
//! - [`cuts`]: cut bundles, stage-LP assembly, dual cut extraction, selection.
//! - [`dcup`]: deterministic cutting-plane loop (single-realization trees).
//! - [`stodcup`]: sampled forward passes, inexactness schedules, bounds,
//!   stopping, policy simulation.
//! - [`instances`]: random benchmark family, deterministic-equivalent size
//!   accounting, and the extensive-form reference oracle used by tests.

pub mod cuts;
pub mod dcup;
pub mod instances;
pub mod lpcore;
pub mod model;
pub mod stodcup;

mod mat;
mod numeric;

pub use mat::RowMat;
pub use numeric::{comp_dot, comp_sum};
