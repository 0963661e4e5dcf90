//! Simulation-model calibration by prediction.
//!
//! Run a simulator many times at random parameters, then fit one
//! regularized regression per parameter that maps summary statistics back
//! to the parameter that produced them. Plugging observed statistics into
//! those regressions yields the estimate; swapping the regression for a
//! classifier turns the same recipe into model selection.

pub mod baselines;
pub mod benchmark;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod glmnet;
pub mod models;
pub mod selector;

pub use error::{Error, Result};

/// Version of every on-disk format written by this crate.
pub const SCHEMA_VERSION: u32 = 1;
