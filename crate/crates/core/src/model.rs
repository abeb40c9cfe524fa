//! Category probabilities, estimation objectives and the score.
//!
//! Probabilities are formed in log space from `ln G` and `ln(1 - G)`, so a
//! category probability of `1e-600` is still represented (as its logarithm).
//! The objectives floor every probability at [`PROB_FLOOR`] before taking
//! logs or powers; the score and the psi functions use the exact log-space
//! values and only floor probabilities that are exactly zero (tied
//! cutpoints).

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::links::{log1mexp, LinkKind};
use crate::numeric::ExactSum;

/// Lower bound applied to probabilities inside the objectives.
pub const PROB_FLOOR: f64 = 1e-12;
pub(crate) const LN_PROB_FLOOR: f64 = -27.631_021_115_928_547;

/// Ordinal responses `y` in `1..=M` with an `n x p` covariate matrix (no
/// intercept column; the cutpoints play that role).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    y: Vec<usize>,
    x: Vec<f64>,
    n_cols: usize,
    n_categories: usize,
}

impl Dataset {
    pub fn new(y: Vec<usize>, rows: Vec<Vec<f64>>, n_categories: usize) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} covariates, expected {n_cols}",
                r.len()
            )));
        }
        Self::from_flat(y, rows.into_iter().flatten().collect(), n_cols, n_categories)
    }

    /// Builds a dataset from a row-major covariate buffer.
    pub fn from_flat(y: Vec<usize>, x: Vec<f64>, n_cols: usize, n_categories: usize) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidInput("dataset has no rows".into()));
        }
        if n_cols == 0 {
            return Err(Error::InvalidInput("dataset has no covariates".into()));
        }
        if n_categories < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 response categories, got {n_categories}"
            )));
        }
        if x.len() != y.len() * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate values for {} rows of {} columns",
                x.len(),
                y.len(),
                n_cols
            )));
        }
        if let Some((i, &v)) = y.iter().enumerate().find(|(_, &v)| v < 1 || v > n_categories) {
            return Err(Error::InvalidInput(format!(
                "response {v} at row {i} is outside 1..={n_categories}"
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite covariate at row {}, column {}",
                i / n_cols,
                i % n_cols
            )));
        }
        Ok(Self {
            y,
            x,
            n_cols,
            n_categories,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn responses(&self) -> &[usize] {
        &self.y
    }

    pub fn response(&self, i: usize) -> usize {
        self.y[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        self.x.chunks_exact(self.n_cols).zip(self.y.iter().copied())
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.x[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Count of each category `1..=M` (index 0 is category 1).
    pub fn category_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_categories];
        for &v in &self.y {
            counts[v - 1] += 1;
        }
        counts
    }

    /// The rows at `indices`, in that order. The category count is kept.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut x = Vec::with_capacity(indices.len() * self.n_cols);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self {
            y,
            x,
            n_cols: self.n_cols,
            n_categories: self.n_categories,
        }
    }
}

/// Regression coefficients and interior cutpoints
/// (`delta_0 = -inf`, `delta_M = +inf` are implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
}

impl Params {
    pub fn new(beta: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let p = Self { beta, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_empty() || self.delta.is_empty() {
            return Err(Error::InvalidInput(
                "need at least one coefficient and one cutpoint".into(),
            ));
        }
        if let Some(v) = self.beta.iter().chain(&self.delta).find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite parameter {v}")));
        }
        check_increasing(&self.delta)
    }

    pub fn n_categories(&self) -> usize {
        self.delta.len() + 1
    }

    /// Length of the stacked vector `(beta, delta)`.
    pub fn dim(&self) -> usize {
        self.beta.len() + self.delta.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.delta).copied().collect()
    }

    /// Splits a stacked `(beta, delta)` vector; no ordering check.
    pub fn from_slice(theta: &[f64], n_beta: usize) -> Self {
        Self {
            beta: theta[..n_beta].to_vec(),
            delta: theta[n_beta..].to_vec(),
        }
    }

    /// Names in stacked order: `beta1.., delta1..`.
    pub fn names(&self) -> Vec<String> {
        param_names(self.beta.len(), self.delta.len())
    }

    pub(crate) fn check_shape(&self, data: &Dataset) -> Result<()> {
        if self.beta.len() != data.n_cols() || self.n_categories() != data.n_categories() {
            return Err(Error::DimensionMismatch(format!(
                "parameters have p={} and M={}, data has p={} and M={}",
                self.beta.len(),
                self.n_categories(),
                data.n_cols(),
                data.n_categories()
            )));
        }
        Ok(())
    }
}

pub(crate) fn param_names(p: usize, cuts: usize) -> Vec<String> {
    (1..=p)
        .map(|k| format!("beta{k}"))
        .chain((1..=cuts).map(|l| format!("delta{l}")))
        .collect()
}

pub(crate) fn check_increasing(delta: &[f64]) -> Result<()> {
    for j in 1..delta.len() {
        if !(delta[j] > delta[j - 1]) {
            return Err(Error::NonIncreasingCutpoints {
                prev: j - 1,
                prev_value: delta[j - 1],
                index: j,
                value: delta[j],
            });
        }
    }
    Ok(())
}

/// Estimation criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MethodSpec", into = "MethodSpec")]
pub enum Method {
    /// Maximum likelihood.
    Ml,
    /// Density-power divergence with tuning `alpha` in (0, 1].
    Dp { alpha: f64 },
    /// Gamma divergence with tuning `gamma` in (0, 1].
    Gamma { gamma: f64 },
}

impl Method {
    pub fn dp(alpha: f64) -> Result<Self> {
        check_tuning("alpha", alpha)?;
        Ok(Method::Dp { alpha })
    }

    pub fn gamma(gamma: f64) -> Result<Self> {
        check_tuning("gamma", gamma)?;
        Ok(Method::Gamma { gamma })
    }

    /// Parses `ml`, `dp` or `gamma` with an optional tuning value.
    pub fn from_name(name: &str, tuning: Option<f64>) -> Result<Self> {
        match (name, tuning) {
            ("ml", _) => Ok(Method::Ml),
            ("dp", Some(t)) => Method::dp(t),
            ("gamma", Some(t)) => Method::gamma(t),
            ("dp" | "gamma", None) => Err(Error::InvalidInput(format!("method '{name}' needs a tuning parameter"))),
            _ => Err(Error::InvalidInput(format!(
                "unknown method '{name}' (expected ml, dp or gamma)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Method::Ml => Ok(()),
            Method::Dp { alpha } => check_tuning("alpha", alpha),
            Method::Gamma { gamma } => check_tuning("gamma", gamma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ml => "ml",
            Method::Dp { .. } => "dp",
            Method::Gamma { .. } => "gamma",
        }
    }

    pub fn tuning(&self) -> Option<f64> {
        match *self {
            Method::Ml => None,
            Method::Dp { alpha } => Some(alpha),
            Method::Gamma { gamma } => Some(gamma),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tuning() {
            None => f.write_str(self.name()),
            Some(t) => write!(f, "{}({})", self.name(), t),
        }
    }
}

fn check_tuning(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must lie in (0, 1], got {v}")))
    }
}

#[derive(Serialize, Deserialize)]
struct MethodSpec {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuning: Option<f64>,
}

impl TryFrom<MethodSpec> for Method {
    type Error = Error;

    fn try_from(spec: MethodSpec) -> Result<Self> {
        Method::from_name(&spec.method, spec.tuning)
    }
}

impl From<Method> for MethodSpec {
    fn from(m: Method) -> Self {
        MethodSpec {
            method: m.name().to_string(),
            tuning: m.tuning(),
        }
    }
}

/// Log-probabilities of every category and log-densities at every cutpoint,
/// for one linear predictor.
#[derive(Debug, Clone)]
pub(crate) struct RowTable {
    pub(crate) log_prob: Vec<f64>,
    pub(crate) log_dens: Vec<f64>,
    log_cdf: Vec<f64>,
    log_sf: Vec<f64>,
}

impl RowTable {
    pub(crate) fn new(n_categories: usize) -> Self {
        let cuts = n_categories - 1;
        Self {
            log_prob: vec![0.0; n_categories],
            log_dens: vec![0.0; cuts],
            log_cdf: vec![0.0; cuts],
            log_sf: vec![0.0; cuts],
        }
    }

    pub(crate) fn fill(&mut self, link: LinkKind, delta: &[f64], eta: f64, with_density: bool) {
        let cuts = delta.len();
        for (j, &d) in delta.iter().enumerate() {
            let u = d - eta;
            let (lc, ls) = link.log_cdf_sf(u);
            self.log_cdf[j] = lc;
            self.log_sf[j] = ls;
            if with_density {
                self.log_dens[j] = link.log_pdf(u);
            }
        }
        self.log_prob[0] = self.log_cdf[0];
        self.log_prob[cuts] = self.log_sf[cuts - 1];
        for k in 1..cuts {
            let (lc_a, lc_b) = (self.log_cdf[k - 1], self.log_cdf[k]);
            let (ls_a, ls_b) = (self.log_sf[k - 1], self.log_sf[k]);
            self.log_prob[k] = if lc_b <= -LN_2 {
                lc_b + log1mexp(lc_a - lc_b)
            } else if ls_a <= -LN_2 {
                ls_a + log1mexp(ls_b - ls_a)
            } else {
                (1.0 - lc_a.exp() - ls_b.exp()).max(0.0).ln()
            };
        }
    }

    /// Exact log-probability of category `y`, with zero probabilities floored.
    pub(crate) fn score_log_prob(&self, y: usize) -> f64 {
        let lp = self.log_prob[y - 1];
        if lp == f64::NEG_INFINITY {
            LN_PROB_FLOOR
        } else {
            lp
        }
    }

    /// Score of `ln f(y | x)` with respect to `(beta, delta)`, written into `out`.
    pub(crate) fn score_into(&self, y: usize, x: &[f64], out: &mut [f64]) {
        let m = self.log_prob.len();
        let p = x.len();
        let lp = self.score_log_prob(y);
        // g(delta_y - eta) / P and g(delta_{y-1} - eta) / P
        let upper = if y < m { (self.log_dens[y - 1] - lp).exp() } else { 0.0 };
        let lower = if y > 1 { (self.log_dens[y - 2] - lp).exp() } else { 0.0 };
        let dbeta = -(upper - lower);
        for k in 0..p {
            out[k] = dbeta * x[k];
        }
        for v in &mut out[p..] {
            *v = 0.0;
        }
        if y < m {
            out[p + y - 1] = upper;
        }
        if y > 1 {
            out[p + y - 2] = -lower;
        }
    }
}

pub(crate) fn linear_predictor(beta: &[f64], x: &[f64]) -> f64 {
    beta.iter().zip(x).map(|(b, v)| b * v).sum()
}

fn check_row(params: &Params, x: &[f64]) -> Result<()> {
    if x.len() != params.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "covariate vector has length {}, expected {}",
            x.len(),
            params.beta.len()
        )));
    }
    Ok(())
}

/// `P(y = m | x)` for every category `m = 1..=M` (index 0 is category 1).
pub fn category_probs(params: &Params, link: LinkKind, x: &[f64]) -> Result<Vec<f64>> {
    check_row(params, x)?;
    let mut table = RowTable::new(params.n_categories());
    table.fill(link, &params.delta, linear_predictor(&params.beta, x), false);
    Ok(table.log_prob.iter().map(|l| l.exp()).collect())
}

/// `P(y = m | x) = G(delta_m - x'beta) - G(delta_{m-1} - x'beta)`.
pub fn category_prob(params: &Params, link: LinkKind, x: &[f64], m: usize) -> Result<f64> {
    if m < 1 || m > params.n_categories() {
        return Err(Error::InvalidInput(format!(
            "category {m} outside 1..={}",
            params.n_categories()
        )));
    }
    Ok(category_probs(params, link, x)?[m - 1])
}

/// Exact (unfloored) `ln f(y | x)`.
pub fn log_prob(params: &Params, link: LinkKind, x: &[f64], y: usize) -> Result<f64> {
    if y < 1 || y > params.n_categories() {
        return Err(Error::InvalidInput(format!(
            "category {y} outside 1..={}",
            params.n_categories()
        )));
    }
    check_row(params, x)?;
    let mut table = RowTable::new(params.n_categories());
    table.fill(link, &params.delta, linear_predictor(&params.beta, x), false);
    Ok(table.log_prob[y - 1])
}

/// `-sum_i ln p_i`, each `p_i` floored at [`PROB_FLOOR`].
pub fn neg_log_lik(params: &Params, link: LinkKind, data: &Dataset) -> Result<f64> {
    params.check_shape(data)?;
    Ok(evaluate(Method::Ml, &params.beta, &params.delta, link, data, false))
}

/// Empirical density-power cross entropy
/// `-(1/a) mean_i p_i^a + 1/(1+a) mean_i sum_m p_im^(1+a)`.
pub fn dp_objective(params: &Params, link: LinkKind, data: &Dataset, alpha: f64) -> Result<f64> {
    params.check_shape(data)?;
    let method = Method::dp(alpha)?;
    Ok(evaluate(method, &params.beta, &params.delta, link, data, false))
}

/// Empirical gamma cross entropy
/// `-(1/g) ln mean_i p_i^g + 1/(1+g) ln mean_i sum_m p_im^(1+g)`.
pub fn gamma_objective(params: &Params, link: LinkKind, data: &Dataset, gamma: f64) -> Result<f64> {
    params.check_shape(data)?;
    let method = Method::gamma(gamma)?;
    Ok(evaluate(method, &params.beta, &params.delta, link, data, false))
}

/// The objective minimized by `method`.
pub fn objective(method: Method, params: &Params, link: LinkKind, data: &Dataset) -> Result<f64> {
    method.validate()?;
    params.check_shape(data)?;
    Ok(evaluate(method, &params.beta, &params.delta, link, data, false))
}

/// Objective evaluation on raw slices. With `centered`, the DP objective
/// omits its constant `-1/alpha` (same minimizer, better conditioned when
/// alpha is small). Sums are exactly rounded, so the value does not depend on
/// row order.
pub(crate) fn evaluate(
    method: Method,
    beta: &[f64],
    delta: &[f64],
    link: LinkKind,
    data: &Dataset,
    centered: bool,
) -> f64 {
    let mut table = RowTable::new(data.n_categories());
    let n = data.n_rows() as f64;
    match method {
        Method::Ml => {
            let mut acc = ExactSum::new();
            for (x, y) in data.rows() {
                table.fill(link, delta, linear_predictor(beta, x), false);
                acc.add(-table.log_prob[y - 1].max(LN_PROB_FLOOR));
            }
            acc.total()
        }
        Method::Dp { alpha: t } | Method::Gamma { gamma: t } => {
            let mut first = ExactSum::new();
            let mut second = ExactSum::new();
            for (x, y) in data.rows() {
                table.fill(link, delta, linear_predictor(beta, x), false);
                first.add((t * table.log_prob[y - 1].max(LN_PROB_FLOOR)).exp_m1());
                for &lp in &table.log_prob {
                    second.add(((1.0 + t) * lp.max(LN_PROB_FLOOR)).exp());
                }
            }
            // first: mean of p_i^t - 1; second: mean of sum_m p_im^(1+t)
            let first = first.total() / n;
            let second = second.total() / n;
            if matches!(method, Method::Dp { .. }) {
                let shift = if centered { 0.0 } else { 1.0 / t };
                -first / t - shift + second / (1.0 + t)
            } else {
                -first.ln_1p() / t + second.ln() / (1.0 + t)
            }
        }
    }
}

/// Score `d ln f(y | x) / d(beta, delta)`, length `p + M - 1`.
///
/// The probability of `y` is taken exactly in log space, so the ratio
/// `g/G` remains correct in the far tails (`x = 50` under probit gives a
/// beta-component of order `x^2`).
pub fn score(params: &Params, link: LinkKind, x: &[f64], y: usize) -> Result<Vec<f64>> {
    check_row(params, x)?;
    if y < 1 || y > params.n_categories() {
        return Err(Error::InvalidInput(format!(
            "category {y} outside 1..={}",
            params.n_categories()
        )));
    }
    let mut table = RowTable::new(params.n_categories());
    table.fill(link, &params.delta, linear_predictor(&params.beta, x), true);
    let mut out = vec![0.0; params.dim()];
    table.score_into(y, x, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig_params() -> Params {
        Params::new(vec![1.0], vec![-1.5, 0.5, 1.5]).unwrap()
    }

    /// Independent normal CDF: Simpson integration of the density.
    fn phi_oracle(u: f64) -> f64 {
        let lim = -40.0;
        let n = 100_000;
        let h = (u - lim) / n as f64;
        let dens = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = dens(lim) + dens(u);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * dens(lim + i as f64 * h);
        }
        s * h / 3.0
    }

    /// Brute-force objectives: direct CDF differences, per-category loops,
    /// naive summation.
    fn brute_objective(method: Method, params: &Params, link: LinkKind, data: &Dataset) -> f64 {
        let m = params.n_categories();
        let prob = |x: &[f64], k: usize| -> f64 {
            let eta: f64 = params.beta.iter().zip(x).map(|(b, v)| b * v).sum();
            let up = if k == m {
                1.0
            } else {
                link.cdf(params.delta[k - 1] - eta)
            };
            let lo = if k == 1 {
                0.0
            } else {
                link.cdf(params.delta[k - 2] - eta)
            };
            (up - lo).max(PROB_FLOOR)
        };
        let n = data.n_rows() as f64;
        match method {
            Method::Ml => data.rows().map(|(x, y)| -prob(x, y).ln()).sum(),
            Method::Dp { alpha } => {
                let a: f64 = data.rows().map(|(x, y)| prob(x, y).powf(alpha)).sum::<f64>() / n;
                let b: f64 = data
                    .rows()
                    .map(|(x, _)| (1..=m).map(|k| prob(x, k).powf(1.0 + alpha)).sum::<f64>())
                    .sum::<f64>()
                    / n;
                -a / alpha + b / (1.0 + alpha)
            }
            Method::Gamma { gamma } => {
                let a: f64 = data.rows().map(|(x, y)| prob(x, y).powf(gamma)).sum::<f64>() / n;
                let b: f64 = data
                    .rows()
                    .map(|(x, _)| (1..=m).map(|k| prob(x, k).powf(1.0 + gamma)).sum::<f64>())
                    .sum::<f64>()
                    / n;
                -a.ln() / gamma + b.ln() / (1.0 + gamma)
            }
        }
    }

    #[test]
    fn category_prob_examples() {
        let p = fig_params();
        let p1 = category_prob(&p, LinkKind::Probit, &[0.0], 1).unwrap();
        assert!((p1 - phi_oracle(-1.5)).abs() < 1e-10);
        assert!((p1 - 0.066_807_201_268_858).abs() < 1e-9);
        let p2 = category_prob(&p, LinkKind::Probit, &[0.0], 2).unwrap();
        assert!((p2 - (phi_oracle(0.5) - phi_oracle(-1.5))).abs() < 1e-10);
        assert!((p2 - 0.624_655).abs() < 1e-6);
        let total: f64 = category_probs(&p, LinkKind::Probit, &[0.0]).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(category_prob(&p, LinkKind::Probit, &[0.0], 0).is_err());
        assert!(category_prob(&p, LinkKind::Probit, &[0.0], 5).is_err());
    }

    #[test]
    fn neg_log_lik_examples() {
        let p = fig_params();
        let one = Dataset::new(vec![2], vec![vec![0.0]], 4).unwrap();
        let v = neg_log_lik(&p, LinkKind::Probit, &one).unwrap();
        let oracle = -(phi_oracle(0.5) - phi_oracle(-1.5)).ln();
        assert!((v - oracle).abs() < 1e-9);
        assert!((v - 0.470_556).abs() < 1e-6);
        let two = Dataset::new(vec![2, 2], vec![vec![0.0], vec![0.0]], 4).unwrap();
        assert_eq!(neg_log_lik(&p, LinkKind::Probit, &two).unwrap(), 2.0 * v);
    }

    #[test]
    fn single_row_divergence_examples() {
        let p = fig_params();
        let one = Dataset::new(vec![2], vec![vec![0.0]], 4).unwrap();
        let probs: Vec<f64> = (1..=4)
            .map(|k| {
                let up = if k == 4 { 1.0 } else { phi_oracle(p.delta[k - 1]) };
                let lo = if k == 1 { 0.0 } else { phi_oracle(p.delta[k - 2]) };
                up - lo
            })
            .collect();
        let dp_expected = -probs[1].powf(0.5) / 0.5 + probs.iter().map(|q| q.powf(1.5)).sum::<f64>() / 1.5;
        let dp = dp_objective(&p, LinkKind::Probit, &one, 0.5).unwrap();
        assert!((dp - dp_expected).abs() < 1e-9, "{dp} vs {dp_expected}");
        let g_expected = -(probs[1].powf(0.5)).ln() / 0.5 + probs.iter().map(|q| q.powf(1.5)).sum::<f64>().ln() / 1.5;
        let g = gamma_objective(&p, LinkKind::Probit, &one, 0.5).unwrap();
        assert!((g - g_expected).abs() < 1e-9, "{g} vs {g_expected}");
        assert!(dp_objective(&p, LinkKind::Probit, &one, 0.0).is_err());
        assert!(gamma_objective(&p, LinkKind::Probit, &one, -1.0).is_err());
        assert!(dp_objective(&p, LinkKind::Probit, &one, 1.5).is_err());
    }

    #[test]
    fn outlier_row_is_ignored_by_divergences() {
        // Row 0 carries x = 1e3; its first-term contribution vanishes, so the
        // objective splits into the outlier's second term plus the rest.
        let p = fig_params();
        let mut rows = vec![vec![1e3]];
        let mut y = vec![1];
        for i in 0..19 {
            rows.push(vec![-1.0 + 0.1 * i as f64]);
            y.push(1 + i % 4);
        }
        let full = Dataset::new(y.clone(), rows.clone(), 4).unwrap();
        let rest = Dataset::new(y[1..].to_vec(), rows[1..].to_vec(), 4).unwrap();
        let n = 20.0;
        for alpha in [0.3, 0.5, 1.0] {
            let full_v = dp_objective(&p, LinkKind::Probit, &full, alpha).unwrap();
            let rest_v = dp_objective(&p, LinkKind::Probit, &rest, alpha).unwrap();
            // Outlier: p_obs floored, sum_m p^(1+a) = 1 (all mass in category 4).
            let outlier_first = -PROB_FLOOR.powf(alpha) / alpha;
            let outlier_second = 1.0 / (1.0 + alpha);
            let reconstructed = ((n - 1.0) * rest_v + outlier_first + outlier_second) / n;
            assert!((full_v - reconstructed).abs() < 1e-12);
            // The first-term contribution itself is negligible.
            assert!((outlier_first / n).abs() < 1e-3 * alpha.recip());
        }
    }

    #[test]
    fn outlier_first_term_decays() {
        // |x'beta| >= 30: p_obs^alpha below 1e-12 under probit.
        let p = fig_params();
        for &x in &[30.0, -30.0, 45.0] {
            for alpha in [0.3, 0.5, 1.0] {
                let y = if x > 0.0 { 1 } else { 4 };
                let lp = log_prob(&p, LinkKind::Probit, &[x], y).unwrap();
                assert!((alpha * lp).exp() < 1e-12, "x={x} alpha={alpha}");
            }
        }
    }

    #[test]
    fn score_examples() {
        let p = fig_params();
        let s = score(&p, LinkKind::Probit, &[0.0], 1).unwrap();
        assert_eq!(s[0], 0.0);
        let s = score(&p, LinkKind::Probit, &[1.0], 1).unwrap();
        let oracle = -((-0.5 * 6.25_f64).exp() / (2.0 * std::f64::consts::PI).sqrt()) / phi_oracle(-2.5);
        assert!((s[0] - oracle).abs() < 1e-8);
        assert!((s[0] + 2.8227).abs() < 1e-4);
        // far tail stays finite and large
        let s = score(&p, LinkKind::Probit, &[50.0], 1).unwrap();
        assert!(s[0].abs() > 1e3 && s[0].is_finite());
    }

    #[test]
    fn score_matches_finite_differences() {
        let mut state = 17u64;
        let mut unif = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for link in LinkKind::ALL {
            for _ in 0..20 {
                let beta = vec![unif() * 2.0 - 1.0, unif() * 2.0 - 1.0];
                let mut delta = vec![unif() * 2.0 - 2.0];
                for _ in 0..3 {
                    let last = *delta.last().unwrap();
                    delta.push(last + 0.3 + unif() * 1.5);
                }
                let params = Params::new(beta, delta).unwrap();
                let x = [unif() * 3.0 - 1.5, unif() * 3.0 - 1.5];
                let y = 1 + (unif() * 5.0) as usize % 5;
                let s = score(&params, link, &x, y).unwrap();
                let theta = params.to_vec();
                let h = 1e-6;
                for j in 0..theta.len() {
                    let mut tp = theta.clone();
                    let mut tm = theta.clone();
                    tp[j] += h;
                    tm[j] -= h;
                    let lp = log_prob(&Params::from_slice(&tp, 2), link, &x, y).unwrap();
                    let lm = log_prob(&Params::from_slice(&tm, 2), link, &x, y).unwrap();
                    let fd = (lp - lm) / (2.0 * h);
                    let err = (fd - s[j]).abs() / s[j].abs().max(1.0);
                    assert!(err <= 1e-6, "{link} j={j} fd={fd} s={}", s[j]);
                }
            }
        }
    }

    #[test]
    fn objectives_match_brute_force() {
        let params = Params::new(vec![0.8, -0.4], vec![-1.0, 0.2, 1.1]).unwrap();
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![(i as f64 * 0.37).sin() * 2.0, (i as f64 * 0.91).cos()])
            .collect();
        let y = vec![1, 2, 3, 4, 2, 3, 1, 4, 3, 2];
        let data = Dataset::new(y, rows, 4).unwrap();
        for link in LinkKind::ALL {
            for method in [Method::Ml, Method::Dp { alpha: 0.3 }, Method::Gamma { gamma: 0.5 }] {
                let v = objective(method, &params, link, &data).unwrap();
                let b = brute_objective(method, &params, link, &data);
                assert!((v - b).abs() <= 1e-12 * b.abs().max(1.0), "{link} {method}: {v} vs {b}");
            }
        }
    }

    #[test]
    fn gamma_objective_permutation_invariant() {
        let params = Params::new(vec![0.8], vec![-1.0, 0.2, 1.1]).unwrap();
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 * 0.37).sin() * 3.0]).collect();
        let y: Vec<usize> = (0..50).map(|i| 1 + (i * 7) % 4).collect();
        let data = Dataset::new(y, rows, 4).unwrap();
        let order: Vec<usize> = (0..50).map(|i| (i * 17) % 50).collect();
        let shuffled = data.select_rows(&order);
        for method in [Method::Ml, Method::Dp { alpha: 0.5 }, Method::Gamma { gamma: 0.5 }] {
            let a = objective(method, &params, LinkKind::Probit, &data).unwrap();
            let b = objective(method, &params, LinkKind::Probit, &shuffled).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn method_serde() {
        let m: Method = serde_json::from_str(r#"{"method":"dp","tuning":0.3}"#).unwrap();
        assert_eq!(m, Method::Dp { alpha: 0.3 });
        assert!(serde_json::from_str::<Method>(r#"{"method":"gamma","tuning":0}"#).is_err());
        assert_eq!(serde_json::to_string(&Method::Ml).unwrap(), r#"{"method":"ml"}"#);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![0], vec![vec![1.0]], 3).is_err());
        assert!(Dataset::new(vec![4], vec![vec![1.0]], 3).is_err());
        assert!(Dataset::new(vec![1], vec![vec![f64::NAN]], 3).is_err());
        assert!(Dataset::new(vec![1, 2], vec![vec![1.0], vec![1.0, 2.0]], 3).is_err());
        assert!(Params::new(vec![1.0], vec![1.0, 1.0]).is_err());
    }

    fn arb_point() -> impl Strategy<Value = (Params, Vec<f64>, LinkKind)> {
        (
            proptest::collection::vec(-2.0f64..2.0, 2),
            -3.0f64..0.0,
            proptest::collection::vec(0.05f64..2.0, 3),
            proptest::collection::vec(-4.0f64..4.0, 2),
            0usize..5,
        )
            .prop_map(|(beta, d0, incs, x, li)| {
                let mut delta = vec![d0];
                for inc in incs {
                    let last = *delta.last().unwrap();
                    delta.push(last + inc);
                }
                (Params::new(beta, delta).unwrap(), x, LinkKind::ALL[li])
            })
    }

    proptest! {
        #[test]
        fn probabilities_form_a_simplex((params, x, link) in arb_point()) {
            let probs = category_probs(&params, link, &x).unwrap();
            prop_assert!(probs.iter().all(|&p| p >= 0.0));
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn expected_score_vanishes((params, x, link) in arb_point()) {
            let probs = category_probs(&params, link, &x).unwrap();
            let mut acc = vec![0.0; params.dim()];
            for (k, pk) in probs.iter().enumerate() {
                let s = score(&params, link, &x, k + 1).unwrap();
                for j in 0..acc.len() {
                    acc[j] += pk * s[j];
                }
            }
            prop_assert!(acc.iter().all(|v| v.abs() <= 1e-8), "{:?}", acc);
        }
    }
}
