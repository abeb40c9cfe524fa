//! Robust estimation for ordinal response (cumulative-link) models.
//!
//! Three estimators are available for the latent-threshold model
//! `z = x'beta + eps`, `y = m  iff  delta_{m-1} < z <= delta_m`:
//! maximum likelihood, the density-power (DP) divergence estimator and the
//! gamma-divergence estimator. The divergence-based estimators have bounded,
//! redescending influence functions for light-tailed links, so gross covariate
//! outliers are effectively ignored.
//!
//! Modules:
//! - [`links`]: the five link families with log-space tails.
//! - [`model`]: category probabilities, objectives and the score.
//! - [`estimate`]: cutpoint reparameterization and Nelder-Mead fitting.
//! - [`inference`]: psi functions, sandwich covariance, Wald tests, influence
//!   profiles and tail-condition probes.
//! - [`sim`]: the contamination Monte-Carlo harness.
//! - [`app`]: CSV ingestion, generalized residuals, distances and the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod error;
pub mod estimate;
pub mod inference;
pub mod links;
pub mod model;
mod numeric;
pub mod optim;
pub mod sim;

pub use error::{Error, Result};
pub use estimate::{fit, FitConfig, FitResult};
pub use links::LinkKind;
pub use model::{Dataset, Method, Params};
