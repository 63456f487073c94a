//! Bayesian nonparametric estimation of mutual information.
//!
//! A sample is modelled with a Dirichlet-process prior `DP(a, G)`. Joint and
//! marginal differential entropies are estimated from finite realizations of
//! the prior or posterior process with a weighted k-nearest-neighbor
//! estimator, and mutual information is the clamped difference
//! `[-H(F) + sum_i H(F_i)]+`. Prior and posterior draws of mutual information
//! feed a relative-belief-ratio test of mutual independence.
//!
//! Module map:
//!
//! * [`sampling`]: seeded streams and every test distribution.
//! * [`dp`]: Dirichlet weights and prior/posterior process realizations.
//! * [`knn`]: k-th nearest-neighbor distances.
//! * [`entropy`]: the four entropy estimators and closed-form entropies.
//! * [`mi`]: mutual-information draws and the midhinge point estimate.
//! * [`rbtest`]: concentration elicitation, relative belief ratio and strength.

pub mod dp;
pub mod entropy;
mod error;
pub mod knn;
mod matrix;
pub mod mi;
pub mod rbtest;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::SampleMatrix;
