//! Squared-difference distances between two parameter estimates.

use crate::error::{Error, Result};
use crate::model::Params;

/// `(|beta_a - beta_b|^2 / p, |delta_a - delta_b|^2 / (M - 1))`.
pub fn distance(a: &Params, b: &Params) -> Result<(f64, f64)> {
    if a.beta.len() != b.beta.len() || a.delta.len() != b.delta.len() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare parameters with (p, M-1) = ({}, {}) and ({}, {})",
            a.beta.len(),
            a.delta.len(),
            b.beta.len(),
            b.delta.len()
        )));
    }
    let mean_sq = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / u.len() as f64;
    Ok((mean_sq(&a.beta, &b.beta), mean_sq(&a.delta, &b.delta)))
}
