//! Structure-agnostic treatment-effect estimation in the partially linear
//! model `Y = θ·T + f(X) + ε`, `T = g(X) + η`.
//!
//! The crate provides the DML baseline, cumulant-based higher-order
//! orthogonal (ACE) estimators of arbitrary order, the residual cumulant
//! estimator they rely on, Lasso nuisance fits, and a Monte Carlo harness
//! for the synthetic demand-estimation study.

pub mod cumulants;
pub mod data;
pub mod error;
pub mod estimators;
pub mod jpoly;
pub mod nuisance;
pub mod partitions;
pub mod simulate;

pub use data::{Dataset, LinearPredictor};
pub use error::{AceError, Result};
