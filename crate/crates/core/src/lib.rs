//! Round-based simulator for heterogeneous wireless sensor networks.
//!
//! Three cluster-head election rules are implemented over a shared engine:
//! LEACH (uniform probability), three-tier SEP (energy-weighted
//! probabilities) and DBCP (SEP thresholds scaled down for nodes closer to
//! the base station than the network's average node distance).
//!
//! A run is a pure function of its [`SimConfig`](model::SimConfig),
//! including the seed.

pub mod cli;
pub mod election;
pub mod engine;
pub mod error;
pub mod model;
pub mod protocols;
pub mod radio;
pub mod report;

pub use error::{Error, Result};
