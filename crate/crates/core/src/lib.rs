//! Bootstrap percolation on the two-community stochastic block model.
//!
//! The library has three layers:
//!
//! * [`sbm`] and [`chain`] simulate the activation process itself, either on a
//!   materialized sparse graph (generation cascade or sequential chain) or in a
//!   lazy, edge-free mode that scales to millions of nodes.
//! * [`phase`] holds the closed-form machinery: the coupling matrix `chi`, the
//!   surplus densities `rho`, the balance curve and its fixed point, regime
//!   classification, the critical curve in seed-fraction space, exact binomial
//!   tails, and classical deviation bounds.
//! * [`experiments`] is the Monte Carlo harness that maps asymptotic
//!   parameters onto finite instances, fans replicas out over a worker pool,
//!   and emits figure-ready CSV plus a reproducibility manifest.
//!
//! Everything is deterministic given a 64-bit master seed; see [`rng`] for the
//! generator contract.

pub mod binom;
pub mod chain;
pub mod error;
pub mod experiments;
pub mod phase;
pub mod rng;
pub mod sbm;
pub mod strategy;

pub use error::{Error, Result};
