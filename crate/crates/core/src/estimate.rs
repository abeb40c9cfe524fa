//! Cutpoint reparameterization, starting values and model fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::links::LinkKind;
use crate::model::{self, check_increasing, Dataset, Method, Params};
use crate::numeric::{quantile_sorted, stream_seed};
use crate::optim::{nelder_mead, NelderMead};

/// Parameters on the unconstrained scale: `delta_tilde[0]` is the first
/// cutpoint, later entries are square roots of the gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconstrainedParams {
    pub beta: Vec<f64>,
    pub delta_tilde: Vec<f64>,
}

impl UnconstrainedParams {
    pub fn to_vec(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.delta_tilde).copied().collect()
    }

    pub fn from_slice(v: &[f64], n_beta: usize) -> Self {
        Self {
            beta: v[..n_beta].to_vec(),
            delta_tilde: v[n_beta..].to_vec(),
        }
    }
}

/// `delta_1 = t_1`, `delta_m = t_1 + sum_{j=2..m} t_j^2`. Zero increments give
/// tied cutpoints; no validation is done here.
pub fn to_constrained(u: &UnconstrainedParams) -> Params {
    Params {
        beta: u.beta.clone(),
        delta: cutpoints(&u.delta_tilde),
    }
}

fn cutpoints(tilde: &[f64]) -> Vec<f64> {
    let mut delta = Vec::with_capacity(tilde.len());
    fill_cutpoints(tilde, &mut delta);
    delta
}

fn fill_cutpoints(tilde: &[f64], delta: &mut Vec<f64>) {
    delta.clear();
    let mut acc = 0.0;
    for (j, t) in tilde.iter().enumerate() {
        acc = if j == 0 { *t } else { acc + t * t };
        delta.push(acc);
    }
}

pub fn from_constrained(p: &Params) -> Result<UnconstrainedParams> {
    check_increasing(&p.delta)?;
    let delta_tilde = p
        .delta
        .iter()
        .enumerate()
        .map(|(j, &d)| if j == 0 { d } else { (d - p.delta[j - 1]).sqrt() })
        .collect();
    Ok(UnconstrainedParams {
        beta: p.beta.clone(),
        delta_tilde,
    })
}

/// `beta = 0` and cutpoints at the link quantiles of the cumulative category
/// frequencies.
pub fn init_params(data: &Dataset, link: LinkKind) -> Result<Params> {
    let counts = data.category_counts();
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCategory(k + 1));
    }
    let n = data.n_rows() as f64;
    let mut cum = 0usize;
    let mut delta = Vec::with_capacity(counts.len() - 1);
    for &c in &counts[..counts.len() - 1] {
        cum += c;
        delta.push(link.quantile(cum as f64 / n)?);
    }
    Params::new(vec![0.0; data.n_cols()], delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub method: Method,
    pub link: LinkKind,
    pub max_iters: usize,
    pub obj_tol: f64,
    pub n_restarts: usize,
    pub seed: u64,
    /// DP and gamma only: also start from an ML fit on the rows left after
    /// [`trimmed_rows`]. Guards against the basin around the contaminated ML
    /// solution.
    #[serde(default = "yes")]
    pub robust_start: bool,
}

fn yes() -> bool {
    true
}

impl FitConfig {
    pub fn new(method: Method, link: LinkKind) -> Self {
        Self {
            method,
            link,
            max_iters: 20_000,
            obj_tol: 1e-10,
            n_restarts: 2,
            seed: 0,
            robust_start: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, n_restarts: usize) -> Self {
        self.n_restarts = n_restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        if self.max_iters < 1 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.obj_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "obj_tol must be positive, got {}",
                self.obj_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Params,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub method: Method,
    pub link: LinkKind,
    /// Best objective value after each optimizer iteration of the selected
    /// start (on the optimizer's internal scale).
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Cutoff, in scaled MADs, used by [`trimmed_rows`].
pub const TRIM_CUTOFF: f64 = 5.0;

/// Rows whose covariates all lie within [`TRIM_CUTOFF`] scaled MADs
/// (`1.4826 * MAD`) of their column medians. Columns with zero MAD, such as
/// mostly-zero indicators, are ignored.
pub fn trimmed_rows(data: &Dataset) -> Vec<usize> {
    let n = data.n_rows();
    let mut keep = vec![true; n];
    let mut col = vec![0.0; n];
    for j in 0..data.n_cols() {
        for (i, c) in col.iter_mut().enumerate() {
            *c = data.row(i)[j];
        }
        col.sort_by(f64::total_cmp);
        let med = quantile_sorted(&col, 0.5);
        let mut dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
        dev.sort_by(f64::total_cmp);
        let scale = 1.4826 * quantile_sorted(&dev, 0.5);
        if !(scale > 0.0) {
            continue;
        }
        for (i, k) in keep.iter_mut().enumerate() {
            if (data.row(i)[j] - med).abs() > TRIM_CUTOFF * scale {
                *k = false;
            }
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

fn robust_start(data: &Dataset, cfg: &FitConfig) -> Option<Params> {
    let rows = trimmed_rows(data);
    if rows.len() == data.n_rows() || rows.len() <= data.n_cols() + data.n_categories() {
        return None;
    }
    let sub = data.select_rows(&rows);
    let start = init_params(&sub, cfg.link).ok()?;
    let ml = FitConfig {
        method: Method::Ml,
        n_restarts: 0,
        robust_start: false,
        ..cfg.clone()
    };
    fit_from(&sub, &ml, &start).ok().map(|r| r.params)
}

/// Minimizes the configured objective starting from [`init_params`] (plus the
/// jittered and robust starts described on [`fit_from`] and
/// [`FitConfig::robust_start`]).
pub fn fit(data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    let start = init_params(data, cfg.link)?;
    let mut best = fit_from(data, cfg, &start)?;
    if cfg.robust_start && !matches!(cfg.method, Method::Ml) {
        if let Some(alt) = robust_start(data, cfg) {
            let single = FitConfig {
                n_restarts: 0,
                ..cfg.clone()
            };
            if let Ok(r) = fit_from(data, &single, &alt) {
                if r.objective < best.objective {
                    best = r;
                }
            }
        }
    }
    Ok(best)
}

/// As [`fit`] but from a caller-supplied start. Restart `r >= 1` begins at
/// the start plus uniform(-0.5, 0.5) noise on the unconstrained scale, drawn
/// from a stream keyed by `(seed, r)`; the best of all runs is returned.
pub fn fit_from(data: &Dataset, cfg: &FitConfig, start: &Params) -> Result<FitResult> {
    cfg.validate()?;
    start.validate()?;
    start.check_shape(data)?;
    let p = data.n_cols();
    let u0 = from_constrained(start)?.to_vec();

    let mut delta = Vec::with_capacity(start.delta.len());
    let mut objective = |theta: &[f64]| {
        fill_cutpoints(&theta[p..], &mut delta);
        model::evaluate(cfg.method, &theta[..p], &delta, cfg.link, data, true)
    };
    let f0 = objective(&u0);
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective(f0));
    }

    let opts = NelderMead {
        max_iters: cfg.max_iters,
        f_tol: cfg.obj_tol,
        ..NelderMead::default()
    };
    let mut best = nelder_mead(&mut objective, &u0, &opts);
    for r in 1..=cfg.n_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, 0x6a17, r as u64));
        let jittered: Vec<f64> = u0.iter().map(|v| v + rng.random_range(-0.5..0.5)).collect();
        let run = nelder_mead(&mut objective, &jittered, &opts);
        if run.fx < best.fx {
            best = run;
        }
    }
    if !best.fx.is_finite() {
        return Err(Error::NonFiniteObjective(best.fx));
    }

    let params = to_constrained(&UnconstrainedParams::from_slice(&best.x, p));
    params.validate()?;
    let objective = model::evaluate(cfg.method, &params.beta, &params.delta, cfg.link, data, false);
    Ok(FitResult {
        params,
        objective,
        converged: best.converged,
        iterations: best.iterations,
        method: cfg.method,
        link: cfg.link,
        trace: best.history,
    })
}
