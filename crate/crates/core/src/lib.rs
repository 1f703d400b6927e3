//! Monte Carlo simulation of distributed opportunistic scheduling (DOS) in
//! uplink K-cell networks.
//!
//! Each cell has one base station and `N` single-antenna users. Users test
//! two local thresholds (desired-link gain, generated inter-cell interference)
//! and each BS grants one qualifying user. The crate draws block-fading
//! channels, runs DOS and the MaxSNR/MinGI/random baselines, computes
//! SINR-based rates and sweeps scenario grids; `analysis` holds the
//! closed-form qualification probabilities and bounds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod scheduling;

pub use error::{Error, Result};
