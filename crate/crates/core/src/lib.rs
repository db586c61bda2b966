//! Parameter estimation for alpha-power-law families, centered on the
//! multivariate Student-t distribution.
//!
//! - [`params`]: validated `(alpha, mu, Sigma)` and derived constants.
//! - [`family`]: power-law and exponential family descriptors, regularity check.
//! - [`studentt`]: density, power-law decomposition, sampling, score.
//! - [`divergence`]: `I_alpha`, KL and the generalized likelihood.
//! - [`estimators`]: sufficient statistics, estimating-equation residuals and the
//!   closed-form heavy-tailed Student-t estimator.
//! - [`compact`]: exact location fit on the compact `alpha = 2` branch.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod compact;
pub mod divergence;
pub mod error;
pub mod estimators;
pub mod family;
pub mod fixtures;
pub mod params;
pub mod quadrature;
pub mod studentt;

pub use batch::SampleBatch;
pub use error::{Error, Result};
pub use params::{AlphaOrder, StudentTParams, Support};
