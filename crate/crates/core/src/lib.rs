//! Monte Carlo Bayes factors for point-null tests in embedded models.
//!
//! The crate implements two Savage–Dickey type estimators of `B₀₁`
//! (`MR`, built on a product-prior posterior, and `VW`, built on the
//! null-conditional posterior), a closed-form toy model to validate them,
//! and a probit regression example comparing them with Chib's method,
//! importance sampling and bridge sampling.

pub mod cli;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod linalg;
pub mod probit;
pub mod quad;
pub mod rng;
pub mod sd;
pub mod toy;

pub use error::{Error, Result};
pub use rng::RngStream;
