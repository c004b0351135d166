//! Class-conditional coupling-flow density estimation with Beta-Binomial
//! uncertainty.
//!
//! A shared stack of RealNVP coupling layers feeds one coupling head per
//! class plus a discriminative sigmoid head. Per-class log-densities become
//! pseudo-counts for a Beta posterior over the positive-class probability,
//! whose 95% credible interval drives abstention.

pub mod bayes;
pub mod data;
pub mod error;
pub mod eval;
pub mod flow;
pub mod model;
pub mod nn;
pub mod numerics;

pub use error::{CsvError, Error, ModelFileError, Result};
pub use numerics::{Matrix, Rng};
