//! Psi functions, sandwich covariance, Wald tests, influence profiles and
//! tail-condition probes.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::links::LinkKind;
use crate::model::{linear_predictor, param_names, Dataset, Method, Params, RowTable, LN_PROB_FLOOR};

/// Estimating-function value for one observation, `beta` block then `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiVector {
    pub values: Vec<f64>,
}

/// Reusable buffers for evaluating psi row by row.
pub(crate) struct PsiEval {
    table: RowTable,
    scores: Vec<f64>,
    dim: usize,
}

impl PsiEval {
    pub(crate) fn new(p: usize, n_categories: usize) -> Self {
        let dim = p + n_categories - 1;
        Self {
            table: RowTable::new(n_categories),
            scores: vec![0.0; dim * n_categories],
            dim,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn eval(
        &mut self,
        method: Method,
        beta: &[f64],
        delta: &[f64],
        link: LinkKind,
        x: &[f64],
        y: usize,
        out: &mut [f64],
    ) {
        let d = self.dim;
        self.table.fill(link, delta, linear_predictor(beta, x), true);
        let t = match method {
            Method::Ml => {
                self.table.score_into(y, x, out);
                return;
            }
            Method::Dp { alpha } => alpha,
            Method::Gamma { gamma } => gamma,
        };
        let m = self.table.log_prob.len();
        for k in 0..m {
            self.table.score_into(k + 1, x, &mut self.scores[k * d..(k + 1) * d]);
        }
        let lp = |k: usize| {
            let v = self.table.log_prob[k];
            if v == f64::NEG_INFINITY {
                LN_PROB_FLOOR
            } else {
                v
            }
        };
        let f_t = (t * lp(y - 1)).exp();
        let s_y = &self.scores[(y - 1) * d..y * d];
        // expected part: sum_m f_m^(1+t) s_m, and sum_m f_m^(1+t)
        let mut total = 0.0;
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let w = ((1.0 + t) * lp(k)).exp();
            total += w;
            for (o, s) in out.iter_mut().zip(&self.scores[k * d..(k + 1) * d]) {
                *o += w * s;
            }
        }
        match method {
            Method::Dp { .. } => {
                for (o, s) in out.iter_mut().zip(s_y) {
                    *o = f_t * s - *o;
                }
            }
            _ => {
                for (o, s) in out.iter_mut().zip(s_y) {
                    *o = f_t * s * total - f_t * *o;
                }
            }
        }
    }
}

fn check_point(params: &Params, x: &[f64], y: usize) -> Result<()> {
    params.validate()?;
    if x.len() != params.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "covariate vector has length {}, expected {}",
            x.len(),
            params.beta.len()
        )));
    }
    if y < 1 || y > params.n_categories() {
        return Err(Error::InvalidInput(format!(
            "category {y} outside 1..={}",
            params.n_categories()
        )));
    }
    Ok(())
}

/// `psi` for one observation.
///
/// - ML: the score `s`.
/// - DP: `f^a s - sum_m f_m^(1+a) s_m`.
/// - gamma: `f^g s sum_m f_m^(1+g) - f^g sum_m f_m^(1+g) s_m`.
pub fn psi(method: Method, params: &Params, link: LinkKind, x: &[f64], y: usize) -> Result<PsiVector> {
    method.validate()?;
    check_point(params, x, y)?;
    let mut ev = PsiEval::new(params.beta.len(), params.n_categories());
    let mut values = vec![0.0; params.dim()];
    ev.eval(method, &params.beta, &params.delta, link, x, y, &mut values);
    Ok(PsiVector { values })
}

/// `(1/n) sum_i psi_i` at `params`.
pub fn mean_psi(method: Method, params: &Params, link: LinkKind, data: &Dataset) -> Result<Vec<f64>> {
    method.validate()?;
    params.check_shape(data)?;
    Ok(mean_psi_raw(method, &params.to_vec(), params.beta.len(), link, data))
}

fn mean_psi_raw(method: Method, theta: &[f64], p: usize, link: LinkKind, data: &Dataset) -> Vec<f64> {
    let d = theta.len();
    let mut ev = PsiEval::new(p, data.n_categories());
    let mut row = vec![0.0; d];
    let mut acc = vec![0.0; d];
    for (x, y) in data.rows() {
        ev.eval(method, &theta[..p], &theta[p..], link, x, y, &mut row);
        for (a, v) in acc.iter_mut().zip(&row) {
            *a += v;
        }
    }
    let n = data.n_rows() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// Default relative finite-difference step for the psi Jacobian.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `J[i][j] = (1/n) sum_r d psi_i / d theta_j` by central differences with
/// step `fd_step * max(1, |theta_j|)`.
pub fn mean_psi_jacobian(
    method: Method,
    params: &Params,
    link: LinkKind,
    data: &Dataset,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    method.validate()?;
    params.check_shape(data)?;
    if !(fd_step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "finite-difference step must be positive, got {fd_step}"
        )));
    }
    let theta = params.to_vec();
    let p = params.beta.len();
    let d = theta.len();
    let mut jac = DMatrix::zeros(d, d);
    let mut work = theta.clone();
    for j in 0..d {
        let h = fd_step * theta[j].abs().max(1.0);
        work[j] = theta[j] + h;
        let up = mean_psi_raw(method, &work, p, link, data);
        work[j] = theta[j] - h;
        let down = mean_psi_raw(method, &work, p, link, data);
        work[j] = theta[j];
        for i in 0..d {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Sandwich pieces for an M-estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCov {
    /// `-(1/n) sum_i d psi_i / d theta`.
    pub m_hat: DMatrix<f64>,
    /// `(1/n) sum_i psi_i psi_i'`.
    pub q_hat: DMatrix<f64>,
    /// `M^-1 Q M^-T`, the covariance of `sqrt(n) (theta_hat - theta)`.
    pub v_hat: DMatrix<f64>,
    pub n: usize,
    /// `max |M - Q|` (ML only; the information equality makes this small).
    pub info_gap: Option<f64>,
    pub names: Vec<String>,
}

impl SandwichCov {
    /// Standard errors `sqrt(V_jj / n)`.
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.v_hat.nrows())
            .map(|j| (self.v_hat[(j, j)] / self.n as f64).sqrt())
            .collect()
    }

    pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }
}

/// Largest tolerated condition number of `M`.
pub const MAX_CONDITION: f64 = 1e12;

pub fn sandwich(method: Method, fit: &FitResult, data: &Dataset, fd_step: f64) -> Result<SandwichCov> {
    if !fit.converged {
        return Err(Error::InvalidInput("sandwich needs a converged fit".into()));
    }
    sandwich_at(method, &fit.params, fit.link, data, fd_step)
}

/// Sandwich covariance at arbitrary parameters.
pub fn sandwich_at(
    method: Method,
    params: &Params,
    link: LinkKind,
    data: &Dataset,
    fd_step: f64,
) -> Result<SandwichCov> {
    params.validate()?;
    let d = params.dim();
    let n = data.n_rows();
    if n <= d {
        return Err(Error::InvalidInput(format!(
            "need more than {d} rows for the sandwich, got {n}"
        )));
    }
    let m_hat = -mean_psi_jacobian(method, params, link, data, fd_step)?;

    let mut q_hat = DMatrix::zeros(d, d);
    let mut ev = PsiEval::new(params.beta.len(), params.n_categories());
    let mut row = vec![0.0; d];
    for (x, y) in data.rows() {
        ev.eval(method, &params.beta, &params.delta, link, x, y, &mut row);
        for i in 0..d {
            for j in 0..=i {
                q_hat[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = q_hat[(i, j)] / n as f64;
            q_hat[(i, j)] = v;
            q_hat[(j, i)] = v;
        }
    }

    let sv = m_hat.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularJacobian(cond));
    }
    let m_inv = m_hat.clone().try_inverse().ok_or(Error::SingularJacobian(cond))?;
    let v = &m_inv * &q_hat * m_inv.transpose();
    let v_hat = (&v + v.transpose()) * 0.5;
    let info_gap = matches!(method, Method::Ml).then(|| (&m_hat - &q_hat).amax());
    Ok(SandwichCov {
        m_hat,
        q_hat,
        v_hat,
        n,
        info_gap,
        names: params.names(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldResult {
    pub rows: Vec<WaldRow>,
}

/// Wald tests of `beta_k = 0` for every coefficient.
pub fn wald(fit: &FitResult, cov: &SandwichCov, data: &Dataset) -> Result<WaldResult> {
    let p = fit.params.beta.len();
    if cov.v_hat.nrows() != fit.params.dim() || data.n_rows() != cov.n {
        return Err(Error::DimensionMismatch(
            "covariance does not match fit and data".into(),
        ));
    }
    let variances: Vec<f64> = (0..p).map(|k| cov.v_hat[(k, k)]).collect();
    wald_table(&fit.params.beta, &variances, cov.n)
}

/// `z = b / sqrt(var / n)`, `p = 2 Phi(-|z|)`.
pub fn wald_table(estimates: &[f64], variances: &[f64], n: usize) -> Result<WaldResult> {
    let mut rows = Vec::with_capacity(estimates.len());
    for (k, (&b, &var)) in estimates.iter().zip(variances).enumerate() {
        let se = (var / n as f64).sqrt();
        if !(se > 0.0) || !se.is_finite() {
            return Err(Error::ZeroStdError(k + 1));
        }
        let z = b / se;
        let p_value = (2.0 * LinkKind::Probit.cdf(-z.abs())).min(1.0);
        rows.push(WaldRow {
            name: format!("beta{}", k + 1),
            estimate: b,
            std_error: se,
            z,
            p_value,
        });
    }
    Ok(WaldResult { rows })
}

/// Psi values along a covariate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceProfile {
    pub method: Method,
    pub link: LinkKind,
    pub y: usize,
    pub params: Params,
    /// Index of the covariate that is varied; the others are held at 0.
    pub covariate: usize,
    pub grid: Vec<f64>,
    pub names: Vec<String>,
    /// `values[i][j]`: parameter `j` at grid point `i`.
    pub values: Vec<Vec<f64>>,
}

impl InfluenceProfile {
    /// Column `j` across the grid.
    pub fn series(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// CSV with columns `x, parameter, method, psi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "parameter", "method", "psi"])?;
        let label = self.method.to_string();
        for (x, row) in self.grid.iter().zip(&self.values) {
            for (name, v) in self.names.iter().zip(row) {
                out.write_record([x.to_string(), name.clone(), label.clone(), v.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub fn influence_profile(
    method: Method,
    params: &Params,
    link: LinkKind,
    y: usize,
    grid: &[f64],
    k: usize,
) -> Result<InfluenceProfile> {
    method.validate()?;
    if k >= params.beta.len() {
        return Err(Error::InvalidInput(format!("covariate index {k} out of range")));
    }
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    let mut x = vec![0.0; params.beta.len()];
    check_point(params, &x, y)?;
    let mut ev = PsiEval::new(params.beta.len(), params.n_categories());
    let values = grid
        .iter()
        .map(|&g| {
            x[k] = g;
            let mut row = vec![0.0; params.dim()];
            ev.eval(method, &params.beta, &params.delta, link, &x, y, &mut row);
            row
        })
        .collect();
    Ok(InfluenceProfile {
        method,
        link,
        y,
        params: params.clone(),
        covariate: k,
        grid: grid.to_vec(),
        names: param_names(params.beta.len(), params.delta.len()),
        values,
    })
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidInput(format!("grid '{spec}' is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Limiting behaviour of a tail sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBehavior {
    ToZero,
    Constant,
    Diverging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailPair {
    pub negative: TailBehavior,
    pub positive: TailBehavior,
}

impl TailPair {
    fn all(&self, b: TailBehavior) -> bool {
        self.negative == b && self.positive == b
    }

    fn any(&self, b: TailBehavior) -> bool {
        self.negative == b || self.positive == b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub u: f64,
    /// `g(u)^alpha * u`
    pub g_alpha_u: f64,
    /// `|d log g / du|`
    pub abs_dlog: f64,
    /// `|u d log g / du|`
    pub abs_u_dlog: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub link: LinkKind,
    pub alpha: f64,
    pub u_max: f64,
    pub rows: Vec<ProbeRow>,
    pub g_alpha_u: TailPair,
    pub abs_dlog: TailPair,
    pub abs_u_dlog: TailPair,
    /// ML influence for the coefficients is bounded.
    pub ml_beta_bounded: bool,
    /// ML influence for the cutpoints is bounded.
    pub ml_delta_bounded: bool,
    /// `g(u)^alpha u -> 0` in both tails.
    pub redescending: bool,
}

impl ProbeReport {
    /// CSV with columns `x, parameter, method, psi` (the probe quantity name
    /// goes in `parameter`, the link in `method`).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "parameter", "method", "psi"])?;
        let label = format!("{}(alpha={})", self.link, self.alpha);
        for r in &self.rows {
            for (name, v) in [
                ("g_alpha_u", r.g_alpha_u),
                ("abs_dlog", r.abs_dlog),
                ("abs_u_dlog", r.abs_u_dlog),
            ] {
                out.write_record([r.u.to_string(), name.to_string(), label.clone(), v.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// `(g(u)^alpha u, |d log g/du|, |u d log g/du|)`; the derivative is a
/// central difference of `log g`.
pub fn tail_quantities(link: LinkKind, alpha: f64, u: f64) -> (f64, f64, f64) {
    let h = 1e-5 * u.abs().max(1.0);
    let dlog = (link.log_pdf(u + h) - link.log_pdf(u - h)) / (2.0 * h);
    ((alpha * link.log_pdf(u)).exp() * u, dlog.abs(), (u * dlog).abs())
}

const PROBE_POINTS: usize = 61;

/// Evaluates the tail quantities on a log-spaced grid over
/// `[u_max/1000, u_max]` in each direction and classifies each by its
/// log-log slope between `u_max/4` and `u_max`.
pub fn condition_probe(link: LinkKind, alpha: f64, u_max: f64) -> Result<ProbeReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(u_max > 0.0) || !u_max.is_finite() {
        return Err(Error::InvalidInput(format!("u_max must be positive, got {u_max}")));
    }
    let mags: Vec<f64> = (0..PROBE_POINTS)
        .map(|i| u_max * 10f64.powf(-3.0 * (PROBE_POINTS - 1 - i) as f64 / (PROBE_POINTS - 1) as f64))
        .collect();
    let mut rows = Vec::with_capacity(2 * PROBE_POINTS);
    for &m in mags.iter().rev() {
        rows.push(probe_row(link, alpha, -m));
    }
    for &m in &mags {
        rows.push(probe_row(link, alpha, m));
    }

    let classify = |pick: fn(&ProbeRow) -> f64| -> TailPair {
        let side = |sign: f64| {
            let far = pick(&probe_row(link, alpha, sign * u_max)).abs();
            let near = pick(&probe_row(link, alpha, sign * u_max / 4.0)).abs();
            tail_behavior(near, far)
        };
        TailPair {
            negative: side(-1.0),
            positive: side(1.0),
        }
    };
    let g_alpha_u = classify(|r| r.g_alpha_u);
    let abs_dlog = classify(|r| r.abs_dlog);
    let abs_u_dlog = classify(|r| r.abs_u_dlog);
    Ok(ProbeReport {
        link,
        alpha,
        u_max,
        rows,
        g_alpha_u,
        abs_dlog,
        abs_u_dlog,
        ml_beta_bounded: !abs_u_dlog.any(TailBehavior::Diverging),
        ml_delta_bounded: !abs_dlog.any(TailBehavior::Diverging),
        redescending: g_alpha_u.all(TailBehavior::ToZero),
    })
}

fn probe_row(link: LinkKind, alpha: f64, u: f64) -> ProbeRow {
    let (g_alpha_u, abs_dlog, abs_u_dlog) = tail_quantities(link, alpha, u);
    ProbeRow {
        u,
        g_alpha_u,
        abs_dlog,
        abs_u_dlog,
    }
}

fn tail_behavior(near: f64, far: f64) -> TailBehavior {
    if far == 0.0 {
        return TailBehavior::ToZero;
    }
    if near == 0.0 {
        return TailBehavior::Diverging;
    }
    let slope = (far.ln() - near.ln()) / 4f64.ln();
    if slope < -0.1 {
        TailBehavior::ToZero
    } else if slope > 0.1 {
        TailBehavior::Diverging
    } else {
        TailBehavior::Constant
    }
}
