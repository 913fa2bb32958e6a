//! Bandwidth-constrained particle-based Bayesian federated learning and
//! unlearning simulator.
//!
//! The crate simulates a parameter-server federation in which one agent per
//! round refines a set of global particles via Stein variational gradient
//! descent against a tilted target, and uploads the particle-update matrix
//! through a bit-exact compression codec (top-k sparsification variants,
//! combinatorial position coding, stochastic quantization). Unlearning runs
//! the same machinery with the data-loss term reversed. A FedAvg baseline
//! shares the codec with a single parameter vector.

pub mod codec;
pub mod config;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod protocol;
pub mod rng;
pub mod runner;
pub mod svgd;

pub use error::{Error, Result};
