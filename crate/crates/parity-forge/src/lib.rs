//! Removal of protected-variable information from tabular data.
//!
//! The pipeline estimates a chain of conditional distributions, applies
//! optimal-transport quantile maps (deterministic for continuous variables,
//! stochastic for atomic ones) to produce M adjusted replicates that are
//! independent of the protected variables, then verifies independence and
//! measures downstream predictive parity and accuracy.

pub mod condmodels;
pub mod data;
pub mod empirical;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod parallel;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
