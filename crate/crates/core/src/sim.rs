//! Monte-Carlo study of estimator bias, MSE and classification rate under
//! covariate contamination.
//!
//! Design: `z = x b1 + d b2 + x d b3 + eps`, `x ~ N(0, 1)`,
//! `d ~ Bernoulli(0.25)`, five response categories. A fraction of the
//! training rows has `x` replaced by `N(mean, sd^2)` draws (the interaction
//! column follows). Every replication draws from independent streams keyed by
//! `(seed, replication, role)`, so results do not depend on thread count.

use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit, FitConfig};
use crate::links::LinkKind;
use crate::model::{category_probs, check_increasing, param_names, Dataset, Method, Params};
use crate::numeric::stream_seed;

/// Environment variable capping the number of simulation threads.
pub const THREADS_ENV: &str = "ROBORD_THREADS";

const ROLE_DATA: u64 = 0;
const ROLE_CONTAMINATION: u64 = 1;
const ROLE_FIT: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorDist {
    Normal,
    Logistic,
    /// Standard Gumbel (maximum), `P(eps <= u) = exp(-exp(-u))`.
    Gumbel,
}

impl ErrorDist {
    /// The link whose CDF is this error distribution.
    pub fn link(self) -> LinkKind {
        match self {
            ErrorDist::Normal => LinkKind::Probit,
            ErrorDist::Logistic => LinkKind::Logit,
            ErrorDist::Gumbel => LinkKind::LogLog,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ErrorDist::Normal => StandardNormal.sample(rng),
            ErrorDist::Logistic => {
                let u: f64 = open_unit(rng);
                (u / (1.0 - u)).ln()
            }
            ErrorDist::Gumbel => -(-open_unit(rng).ln()).ln(),
        }
    }

    /// True cutpoints used with `beta = (2.5, 1.2, 0.7)`.
    pub fn standard_cutpoints(self) -> Vec<f64> {
        match self {
            ErrorDist::Normal => vec![-3.0, -0.7, 1.6, 3.9],
            ErrorDist::Logistic => vec![-3.3, -0.8, 1.7, 4.2],
            ErrorDist::Gumbel => vec![-2.9, 1.0, 2.9, 4.8],
        }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// How predicted categories are formed for the classification rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionRule {
    /// Most probable category, ties to the lower one.
    #[default]
    Modal,
    /// Smallest category whose cumulative probability reaches 1/2.
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    pub error_dist: ErrorDist,
    /// Link used for fitting; defaults to the one matching `error_dist`.
    #[serde(default)]
    pub link: Option<LinkKind>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_beta")]
    pub true_beta: Vec<f64>,
    /// Defaults to [`ErrorDist::standard_cutpoints`].
    #[serde(default)]
    pub true_delta: Option<Vec<f64>>,
    #[serde(default)]
    pub outlier_frac: f64,
    #[serde(default = "default_outlier_mean")]
    pub outlier_mean: f64,
    #[serde(default = "default_outlier_sd")]
    pub outlier_sd: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub prediction: PredictionRule,
}

fn default_n() -> usize {
    200
}
fn default_beta() -> Vec<f64> {
    vec![2.5, 1.2, 0.7]
}
fn default_outlier_mean() -> f64 {
    20.0
}
fn default_outlier_sd() -> f64 {
    1.0
}
fn default_replications() -> usize {
    1000
}

impl SimScenario {
    /// The standard design for `dist`: n = 200, no contamination, outliers
    /// (when enabled) from N(20, 1), 1000 replications.
    pub fn standard(dist: ErrorDist) -> Self {
        Self {
            error_dist: dist,
            link: None,
            n: default_n(),
            true_beta: default_beta(),
            true_delta: None,
            outlier_frac: 0.0,
            outlier_mean: default_outlier_mean(),
            outlier_sd: default_outlier_sd(),
            replications: default_replications(),
            seed: 0,
            prediction: PredictionRule::Modal,
        }
    }

    pub fn link(&self) -> LinkKind {
        self.link.unwrap_or_else(|| self.error_dist.link())
    }

    pub fn delta(&self) -> Vec<f64> {
        self.true_delta
            .clone()
            .unwrap_or_else(|| self.error_dist.standard_cutpoints())
    }

    pub fn true_params(&self) -> Params {
        Params {
            beta: self.true_beta.clone(),
            delta: self.delta(),
        }
    }

    /// Number of contaminated rows, `frac * n` rounded half up.
    pub fn n_outliers(&self) -> usize {
        outlier_count(self.outlier_frac, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.replications < 1 {
            return Err(Error::InvalidInput("n and replications must be positive".into()));
        }
        if self.true_beta.len() != 3 || self.true_beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(
                "true_beta must hold 3 finite values (x, d, x*d)".into(),
            ));
        }
        let delta = self.delta();
        if delta.is_empty() || delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidInput("true_delta must hold finite cutpoints".into()));
        }
        check_increasing(&delta)?;
        if !(0.0..1.0).contains(&self.outlier_frac) {
            return Err(Error::InvalidInput(format!(
                "outlier_frac must lie in [0, 1), got {}",
                self.outlier_frac
            )));
        }
        if !(self.outlier_sd > 0.0) || !self.outlier_mean.is_finite() || !self.outlier_sd.is_finite() {
            return Err(Error::InvalidInput(
                "outlier distribution must have finite mean and positive sd".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

fn outlier_count(frac: f64, n: usize) -> usize {
    ((frac * n as f64) + 0.5).floor() as usize
}

/// Random stream for `(seed, replication, role)`.
pub fn stream(seed: u64, replication: u64, role: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, replication, role))
}

/// Category of latent value `z`: `m` such that `delta_{m-1} < z <= delta_m`.
pub fn bin_latent(z: f64, delta: &[f64]) -> usize {
    1 + delta.iter().filter(|&&d| d < z).count()
}

/// One design row `(x, d, x d)` and its response.
pub fn design_row(beta: &[f64], delta: &[f64], x: f64, d: f64, eps: f64) -> ([f64; 3], usize) {
    let row = [x, d, x * d];
    let z = row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + eps;
    (row, bin_latent(z, delta))
}

fn draw(scn: &SimScenario, delta: &[f64], rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let mut x = Vec::with_capacity(scn.n * 3);
    let mut y = Vec::with_capacity(scn.n);
    for _ in 0..scn.n {
        let xv: f64 = StandardNormal.sample(rng);
        let dv = if rng.random_bool(0.25) { 1.0 } else { 0.0 };
        let eps = scn.error_dist.sample(rng);
        let (row, cat) = design_row(&scn.true_beta, delta, xv, dv, eps);
        x.extend_from_slice(&row);
        y.push(cat);
    }
    Dataset::from_flat(y, x, 3, delta.len() + 1)
}

/// A training draw and an independent outlier-free validation draw of the
/// same size.
pub fn gen_dataset(scn: &SimScenario, rng: &mut ChaCha8Rng) -> Result<(Dataset, Dataset)> {
    scn.validate()?;
    let delta = scn.delta();
    let train = draw(scn, &delta, rng)?;
    let valid = draw(scn, &delta, rng)?;
    Ok((train, valid))
}

/// Replaces column 0 in `round(frac n)` distinct random rows with
/// `N(mean, sd^2)` draws. For the three-column study design the interaction
/// column 2 is recomputed as `x * d`. Returns the new data and the rows
/// touched (ascending).
pub fn contaminate(
    data: &Dataset,
    frac: f64,
    mean: f64,
    sd: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Dataset, Vec<usize>)> {
    if !(0.0..1.0).contains(&frac) {
        return Err(Error::InvalidInput(format!(
            "contamination fraction must lie in [0, 1), got {frac}"
        )));
    }
    let dist = Normal::new(mean, sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let k = outlier_count(frac, data.n_rows());
    let mut rows: Vec<usize> = sample(rng, data.n_rows(), k).into_vec();
    rows.sort_unstable();
    let mut out = data.clone();
    for &i in &rows {
        let v = dist.sample(rng);
        let r = out.row_mut(i);
        r[0] = v;
        if r.len() == 3 {
            r[2] = v * r[1];
        }
    }
    Ok((out, rows))
}

/// Predicted category at `x` under `rule`.
pub fn predict(params: &Params, link: LinkKind, x: &[f64], rule: PredictionRule) -> Result<usize> {
    let probs = category_probs(params, link, x)?;
    Ok(match rule {
        PredictionRule::Modal => {
            let mut best = 0;
            for (k, &p) in probs.iter().enumerate() {
                if p > probs[best] {
                    best = k;
                }
            }
            best + 1
        }
        PredictionRule::Median => {
            let mut cum = 0.0;
            probs
                .iter()
                .position(|p| {
                    cum += p;
                    cum >= 0.5
                })
                .unwrap_or(probs.len() - 1)
                + 1
        }
    })
}

/// Most probable category, ties broken toward the lower index.
pub fn predict_modal(params: &Params, link: LinkKind, x: &[f64]) -> Result<usize> {
    predict(params, link, x, PredictionRule::Modal)
}

/// Share of rows whose predicted category equals the observed one.
pub fn classification_rate(params: &Params, link: LinkKind, data: &Dataset, rule: PredictionRule) -> Result<f64> {
    let mut hits = 0usize;
    for (x, y) in data.rows() {
        if predict(params, link, x, rule)? == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.n_rows() as f64)
}

/// Aggregated results for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub label: String,
    pub method: Method,
    pub link: LinkKind,
    pub names: Vec<String>,
    /// Signed mean error, `mean(theta_hat) - theta`.
    pub bias: Vec<f64>,
    pub mse: Vec<f64>,
    pub ccr: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Fits that hit the iteration budget (kept in the averages).
    pub n_unconverged: usize,
}

impl SimMetrics {
    pub fn bias_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.bias[i])
    }

    pub fn mse_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.mse[i])
    }
}

/// Per-replication outcome for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub estimate: Option<Vec<f64>>,
    pub ccr: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub scenario: SimScenario,
    pub metrics: Vec<SimMetrics>,
    /// `outcomes[method][replication]`.
    pub outcomes: Vec<Vec<RepOutcome>>,
}

impl StudyResult {
    /// CSV with columns `method, tuning, parameter, bias, mse`; each method
    /// ends with a `CCR` row whose value sits in the `bias` column.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_metrics_csv(&self.metrics, w)
    }
}

pub fn write_metrics_csv<W: Write>(metrics: &[SimMetrics], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "tuning", "parameter", "bias", "mse"])?;
    for m in metrics {
        let tuning = m.method.tuning().map(|t| t.to_string()).unwrap_or_default();
        for ((name, b), e) in m.names.iter().zip(&m.bias).zip(&m.mse) {
            out.write_record([
                m.label.clone(),
                tuning.clone(),
                name.clone(),
                b.to_string(),
                e.to_string(),
            ])?;
        }
        out.write_record([
            m.label.clone(),
            tuning.clone(),
            "CCR".into(),
            m.ccr.to_string(),
            String::new(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Label used in tables: the method, plus `+link` when it differs from the
/// scenario's link.
pub fn method_label(cfg: &FitConfig, scenario_link: LinkKind) -> String {
    let base = cfg.method.to_string();
    if cfg.link == scenario_link {
        base
    } else {
        format!("{base}+{}", cfg.link)
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&k| k > 0)
}

/// Runs `f(rep)` for every replication on a pool capped by
/// [`THREADS_ENV`], returning results in replication order.
pub fn par_replications<T, F>(replications: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_count() {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..replications).into_par_iter().map(&f).collect()))
}

/// Maximum tolerated share of failed fits per method.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Runs the study for every configuration in `methods`. The `seed` of each
/// configuration is replaced by a per-replication stream seed.
pub fn run_study(scn: &SimScenario, methods: &[FitConfig]) -> Result<StudyResult> {
    scn.validate()?;
    for cfg in methods {
        cfg.validate()?;
    }
    let truth = scn.true_params().to_vec();
    let per_rep = par_replications(scn.replications, |rep| replicate(scn, methods, rep as u64))?;

    let mut outcomes: Vec<Vec<RepOutcome>> = vec![Vec::with_capacity(scn.replications); methods.len()];
    for rep in per_rep {
        for (slot, o) in outcomes.iter_mut().zip(rep?) {
            slot.push(o);
        }
    }

    let names = param_names(3, truth.len() - 3);
    let mut metrics = Vec::with_capacity(methods.len());
    for (cfg, outs) in methods.iter().zip(&outcomes) {
        let ok: Vec<(&Vec<f64>, f64)> = outs
            .iter()
            .filter_map(|o| Some((o.estimate.as_ref()?, o.ccr?)))
            .collect();
        let failed = outs.len() - ok.len();
        if failed as f64 > MAX_FAILURE_RATE * outs.len() as f64 || ok.is_empty() {
            let first = outs.iter().find_map(|o| o.error.clone()).unwrap_or_default();
            return Err(Error::TooManyFailures {
                failed,
                total: outs.len(),
                first,
            });
        }
        let s = ok.len() as f64;
        let mut bias = vec![0.0; truth.len()];
        let mut mse = vec![0.0; truth.len()];
        for (est, _) in &ok {
            for j in 0..truth.len() {
                let e = est[j] - truth[j];
                bias[j] += e;
                mse[j] += e * e;
            }
        }
        bias.iter_mut().for_each(|b| *b /= s);
        mse.iter_mut().for_each(|m| *m /= s);
        let ccr = ok.iter().map(|(_, c)| c).sum::<f64>() / s;
        metrics.push(SimMetrics {
            label: method_label(cfg, scn.link()),
            method: cfg.method,
            link: cfg.link,
            names: names.clone(),
            bias,
            mse,
            ccr,
            n_ok: ok.len(),
            n_failed: failed,
            n_unconverged: outs.iter().filter(|o| o.estimate.is_some() && !o.converged).count(),
        });
    }
    Ok(StudyResult {
        scenario: scn.clone(),
        metrics,
        outcomes,
    })
}

/// Training data (contaminated as configured) and validation data for one
/// replication.
pub fn replication_data(scn: &SimScenario, rep: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = stream(scn.seed, rep, ROLE_DATA);
    let (train, valid) = gen_dataset(scn, &mut rng)?;
    let train = if scn.n_outliers() > 0 {
        let mut crng = stream(scn.seed, rep, ROLE_CONTAMINATION);
        contaminate(&train, scn.outlier_frac, scn.outlier_mean, scn.outlier_sd, &mut crng)?.0
    } else {
        train
    };
    Ok((train, valid))
}

fn replicate(scn: &SimScenario, methods: &[FitConfig], rep: u64) -> Result<Vec<RepOutcome>> {
    let (train, valid) = replication_data(scn, rep)?;
    Ok(methods
        .iter()
        .enumerate()
        .map(|(k, cfg)| {
            let cfg = FitConfig {
                seed: stream_seed(scn.seed, rep, ROLE_FIT + k as u64),
                ..cfg.clone()
            };
            match fit(&train, &cfg).and_then(|r| {
                let ccr = classification_rate(&r.params, cfg.link, &valid, scn.prediction)?;
                Ok((r, ccr))
            }) {
                Ok((r, ccr)) => RepOutcome {
                    estimate: Some(r.params.to_vec()),
                    ccr: Some(ccr),
                    converged: r.converged,
                    error: None,
                },
                Err(e) => RepOutcome {
                    estimate: None,
                    ccr: None,
                    converged: false,
                    error: Some(format!("replication {rep}: {e}")),
                },
            }
        })
        .collect())
}

/// Scenario plus the list of methods to compare, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    #[serde(flatten)]
    pub scenario: SimScenario,
    #[serde(default)]
    pub methods: Vec<MethodEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub method: String,
    #[serde(default)]
    pub tuning: Option<f64>,
    #[serde(default)]
    pub link: Option<LinkKind>,
    #[serde(default)]
    pub n_restarts: Option<usize>,
}

impl StudySpec {
    /// Fit configurations; when no methods are listed: ML, DP(0.3), DP(0.5),
    /// gamma(0.3), gamma(0.5).
    pub fn fit_configs(&self) -> Result<Vec<FitConfig>> {
        let link = self.scenario.link();
        if self.methods.is_empty() {
            return Ok([
                Method::Ml,
                Method::Dp { alpha: 0.3 },
                Method::Dp { alpha: 0.5 },
                Method::Gamma { gamma: 0.3 },
                Method::Gamma { gamma: 0.5 },
            ]
            .into_iter()
            .map(|m| FitConfig::new(m, link))
            .collect());
        }
        self.methods
            .iter()
            .map(|e| {
                let mut cfg = FitConfig::new(Method::from_name(&e.method, e.tuning)?, e.link.unwrap_or(link));
                if let Some(r) = e.n_restarts {
                    cfg.n_restarts = r;
                }
                Ok(cfg)
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.scenario.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_examples() {
        let beta = [2.5, 1.2, 0.7];
        let delta = ErrorDist::Normal.standard_cutpoints();
        // z = 0 lies in (delta_2, delta_3] = (-0.7, 1.6]
        assert_eq!(design_row(&beta, &delta, 0.0, 0.0, 0.0).1, 3);
        assert_eq!(design_row(&beta, &delta, 0.0, 0.0, -5.0).1, 1);
        assert_eq!(bin_latent(-0.7, &delta), 2);
        assert_eq!(bin_latent(10.0, &delta), 5);
        let (row, _) = design_row(&beta, &delta, 1.5, 1.0, 0.0);
        assert_eq!(row, [1.5, 1.0, 1.5]);
    }

    #[test]
    fn contamination_examples() {
        let scn = SimScenario::standard(ErrorDist::Normal);
        let (data, _) = gen_dataset(&scn, &mut stream(3, 0, 0)).unwrap();
        let (same, rows) = contaminate(&data, 0.0, 20.0, 1.0, &mut stream(3, 0, 1)).unwrap();
        assert_eq!(same, data);
        assert!(rows.is_empty());
        let (dirty, rows) = contaminate(&data, 0.05, 20.0, 1.0, &mut stream(3, 0, 1)).unwrap();
        assert_eq!(rows.len(), 10);
        let changed: Vec<usize> = (0..data.n_rows()).filter(|&i| dirty.row(i) != data.row(i)).collect();
        assert_eq!(changed, rows);
        for &i in &rows {
            let r = dirty.row(i);
            assert!(r[0] > 14.0);
            assert_eq!(r[1], data.row(i)[1]);
            assert_eq!(r[2], r[0] * r[1]);
            assert_eq!(dirty.response(i), data.response(i));
        }
        assert!(contaminate(&data, 1.0, 20.0, 1.0, &mut stream(3, 0, 1)).is_err());
        assert_eq!(outlier_count(0.025, 200), 5);
        assert_eq!(outlier_count(0.025, 100), 3);
    }

    #[test]
    fn predict_examples() {
        let p = Params::new(vec![1.0], vec![-1.5, 0.5, 1.5]).unwrap();
        assert_eq!(predict_modal(&p, LinkKind::Probit, &[0.0]).unwrap(), 2);
        assert_eq!(predict_modal(&p, LinkKind::Probit, &[10.0]).unwrap(), 4);
        assert_eq!(predict_modal(&p, LinkKind::Probit, &[-10.0]).unwrap(), 1);
        // exact tie between categories 1 and 2 at M = 2, delta = 0
        let tie = Params::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(predict_modal(&tie, LinkKind::Logit, &[0.0]).unwrap(), 1);
        assert_eq!(
            predict(&p, LinkKind::Probit, &[0.0], PredictionRule::Median).unwrap(),
            2
        );
    }

    #[test]
    fn scenario_json() {
        let s = SimScenario::from_json(r#"{"error_dist":"gumbel","outlier_frac":0.1,"replications":5}"#).unwrap();
        assert_eq!(s.link(), LinkKind::LogLog);
        assert_eq!(s.delta(), vec![-2.9, 1.0, 2.9, 4.8]);
        assert_eq!(s.n_outliers(), 20);
        assert!(SimScenario::from_json(r#"{"error_dist":"normal","true_delta":[1,0,2,3]}"#).is_err());
        assert!(SimScenario::from_json(r#"{"error_dist":"normal","outlier_frac":1.0}"#).is_err());
        let spec = StudySpec::from_json(
            r#"{"error_dist":"normal","methods":[{"method":"ml"},{"method":"dp","tuning":0.3},{"method":"ml","link":"cauchit"}]}"#,
        )
        .unwrap();
        let cfgs = spec.fit_configs().unwrap();
        assert_eq!(cfgs.len(), 3);
        assert_eq!(method_label(&cfgs[2], LinkKind::Probit), "ml+cauchit");
        assert_eq!(method_label(&cfgs[1], LinkKind::Probit), "dp(0.3)");
    }

    #[test]
    fn error_draws_have_expected_medians() {
        let mut rng = stream(11, 0, 9);
        for dist in [ErrorDist::Normal, ErrorDist::Logistic, ErrorDist::Gumbel] {
            let n = 20_000;
            let below = (0..n).filter(|_| dist.sample(&mut rng) <= 0.0).count() as f64 / n as f64;
            let expect = dist.link().cdf(0.0);
            assert!((below - expect).abs() < 0.015, "{dist:?}: {below} vs {expect}");
        }
    }
}
