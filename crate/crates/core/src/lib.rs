//! Inference tools for network-dependent data.
//!
//! The crate is organised around the objects used when a cross-section of
//! observations is laid on a graph and dependence decays with graph distance:
//!
//! - [`graph`]: immutable graphs, BFS neighbourhood shells, clique numbers,
//!   embedding diagnostics and named fixtures.
//! - [`netstats`]: shell/ball denseness statistics, the `c_n` coefficient,
//!   dependence-coefficient sequences and finite-n condition diagnostics.
//! - [`kernels`]: HAC kernels, the logarithmic bandwidth rule and weight
//!   matrices with PSD checks.
//! - [`hac`]: network HAC variance estimators, confidence intervals and the
//!   exact variance of the moving-average benchmark model.
//! - [`dgp`]: random network formation and dependent-process generators.
//! - [`verify`]: covariance-inequality evaluators and limit-theorem
//!   diagnostics.
//! - [`montecarlo`]: the coverage study harness.

pub mod dgp;
pub mod error;
pub mod graph;
pub mod hac;
pub mod kernels;
pub mod montecarlo;
pub mod netstats;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Distance, Graph};
pub use hac::{HacResult, Sample};
pub use kernels::{BandwidthRule, KernelFamily, KernelSpec};
pub use netstats::ThetaSequence;
