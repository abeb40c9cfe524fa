//! Python bindings for `robord`.
//!
//! Links and methods are passed as lowercase strings (`"probit"`, `"dp"`,
//! ...); the DP and gamma methods take their tuning value separately.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use robord::app::{distance as distance_rs, generalized_residuals_at, ingest};
use robord::estimate::{fit as fit_rs, FitConfig, FitResult};
use robord::inference::{self, SandwichCov, DEFAULT_FD_STEP};
use robord::model::{self, Dataset, Method, Params};
use robord::sim::{self, ErrorDist, SimScenario};
use robord::{Error, LinkKind};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NonFiniteObjective(_) | Error::SingularJacobian(_) | Error::TooManyFailures { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn link_of(name: &str) -> PyResult<LinkKind> {
    name.parse::<LinkKind>().map_err(to_py)
}

fn method_of(name: &str, tuning: Option<f64>) -> PyResult<Method> {
    Method::from_name(name, tuning).map_err(to_py)
}

#[pyclass(name = "Params", module = "robord_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyParams {
    inner: Params,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(beta: Vec<f64>, delta: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: Params::new(beta, delta).map_err(to_py)?,
        })
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.inner.beta.clone()
    }

    #[getter]
    fn delta(&self) -> Vec<f64> {
        self.inner.delta.clone()
    }

    fn __repr__(&self) -> String {
        format!("Params(beta={:?}, delta={:?})", self.inner.beta, self.inner.delta)
    }
}

#[pyclass(name = "Dataset", module = "robord_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// `y` holds categories `1..=M`; `x` is a list of rows.
    #[new]
    #[pyo3(signature = (y, x, n_categories=None))]
    fn new(y: Vec<usize>, x: Vec<Vec<f64>>, n_categories: Option<usize>) -> PyResult<Self> {
        let m = n_categories.unwrap_or_else(|| y.iter().copied().max().unwrap_or(0));
        Ok(Self {
            inner: Dataset::new(y, x, m).map_err(to_py)?,
        })
    }

    /// Loads a CSV with a JSON column spec; returns `(dataset, covariate names)`.
    #[staticmethod]
    fn from_csv(path: &str, spec_json: &str) -> PyResult<(Self, Vec<String>)> {
        let spec = ingest::parse_spec(spec_json).map_err(to_py)?;
        let loaded = ingest::load_csv(std::path::Path::new(path), &spec).map_err(to_py)?;
        Ok((Self { inner: loaded.dataset }, loaded.design_names))
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    #[getter]
    fn n_categories(&self) -> usize {
        self.inner.n_categories()
    }

    #[getter]
    fn y(&self) -> Vec<usize> {
        self.inner.responses().to_vec()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.n_rows() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }
}

#[pyclass(name = "FitResult", module = "robord_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyFitResult {
    inner: FitResult,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn params(&self) -> PyParams {
        PyParams {
            inner: self.inner.params.clone(),
        }
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    #[getter]
    fn tuning(&self) -> Option<f64> {
        self.inner.method.tuning()
    }

    #[getter]
    fn link(&self) -> &'static str {
        self.inner.link.name()
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(method={}, link={}, objective={}, converged={}, params={:?})",
            self.inner.method, self.inner.link, self.inner.objective, self.inner.converged, self.inner.params
        )
    }
}

#[pyfunction]
fn cdf(link: &str, u: f64) -> PyResult<f64> {
    Ok(link_of(link)?.cdf(u))
}

#[pyfunction]
fn pdf(link: &str, u: f64) -> PyResult<f64> {
    Ok(link_of(link)?.pdf(u))
}

#[pyfunction]
fn quantile(link: &str, q: f64) -> PyResult<f64> {
    link_of(link)?.quantile(q).map_err(to_py)
}

#[pyfunction]
fn category_probs(params: &PyParams, link: &str, x: Vec<f64>) -> PyResult<Vec<f64>> {
    model::category_probs(&params.inner, link_of(link)?, &x).map_err(to_py)
}

#[pyfunction]
fn neg_log_lik(params: &PyParams, link: &str, data: &PyDataset) -> PyResult<f64> {
    model::neg_log_lik(&params.inner, link_of(link)?, &data.inner).map_err(to_py)
}

#[pyfunction]
fn dp_objective(params: &PyParams, link: &str, data: &PyDataset, alpha: f64) -> PyResult<f64> {
    model::dp_objective(&params.inner, link_of(link)?, &data.inner, alpha).map_err(to_py)
}

#[pyfunction]
fn gamma_objective(params: &PyParams, link: &str, data: &PyDataset, gamma: f64) -> PyResult<f64> {
    model::gamma_objective(&params.inner, link_of(link)?, &data.inner, gamma).map_err(to_py)
}

#[pyfunction]
fn score(params: &PyParams, link: &str, x: Vec<f64>, y: usize) -> PyResult<Vec<f64>> {
    model::score(&params.inner, link_of(link)?, &x, y).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (method, params, link, x, y, tuning=None))]
fn psi(method: &str, params: &PyParams, link: &str, x: Vec<f64>, y: usize, tuning: Option<f64>) -> PyResult<Vec<f64>> {
    let m = method_of(method, tuning)?;
    Ok(inference::psi(m, &params.inner, link_of(link)?, &x, y)
        .map_err(to_py)?
        .values)
}

#[pyfunction]
#[pyo3(signature = (data, method="ml", tuning=None, link="probit", n_restarts=2, seed=0, max_iters=20000, obj_tol=1e-10, robust_start=true))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    data: &PyDataset,
    method: &str,
    tuning: Option<f64>,
    link: &str,
    n_restarts: usize,
    seed: u64,
    max_iters: usize,
    obj_tol: f64,
    robust_start: bool,
) -> PyResult<PyFitResult> {
    let cfg = FitConfig {
        method: method_of(method, tuning)?,
        link: link_of(link)?,
        max_iters,
        obj_tol,
        n_restarts,
        seed,
        robust_start,
    };
    let data = data.inner.clone();
    let r = py.detach(move || fit_rs(&data, &cfg)).map_err(to_py)?;
    Ok(PyFitResult { inner: r })
}

fn cov_dict<'py>(py: Python<'py>, c: &SandwichCov) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("names", c.names.clone())?;
    d.set_item("std_errors", c.std_errors())?;
    d.set_item("m_hat", SandwichCov::rows(&c.m_hat))?;
    d.set_item("q_hat", SandwichCov::rows(&c.q_hat))?;
    d.set_item("v_hat", SandwichCov::rows(&c.v_hat))?;
    d.set_item("info_gap", c.info_gap)?;
    Ok(d)
}

/// Sandwich covariance at a fit: dict with `m_hat`, `q_hat`, `v_hat`,
/// `std_errors`, `names` and `info_gap` (ML only).
#[pyfunction]
#[pyo3(signature = (result, data, fd_step=DEFAULT_FD_STEP))]
fn sandwich<'py>(
    py: Python<'py>,
    result: &PyFitResult,
    data: &PyDataset,
    fd_step: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let c = inference::sandwich(result.inner.method, &result.inner, &data.inner, fd_step).map_err(to_py)?;
    cov_dict(py, &c)
}

type WaldRow = (String, f64, f64, f64, f64);

/// Wald tests of `beta_k = 0`: list of `(name, estimate, std_error, z, p_value)`.
#[pyfunction]
#[pyo3(signature = (result, data, fd_step=DEFAULT_FD_STEP))]
fn wald(result: &PyFitResult, data: &PyDataset, fd_step: f64) -> PyResult<Vec<WaldRow>> {
    let c = inference::sandwich(result.inner.method, &result.inner, &data.inner, fd_step).map_err(to_py)?;
    let w = inference::wald(&result.inner, &c, &data.inner).map_err(to_py)?;
    Ok(w.rows
        .into_iter()
        .map(|r| (r.name, r.estimate, r.std_error, r.z, r.p_value))
        .collect())
}

/// Psi along a grid: returns `(parameter names, values[grid point][parameter])`.
#[pyfunction]
#[pyo3(signature = (method, params, link, y, grid, tuning=None, covariate=0))]
fn influence_profile(
    method: &str,
    params: &PyParams,
    link: &str,
    y: usize,
    grid: Vec<f64>,
    tuning: Option<f64>,
    covariate: usize,
) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    let m = method_of(method, tuning)?;
    let p = inference::influence_profile(m, &params.inner, link_of(link)?, y, &grid, covariate).map_err(to_py)?;
    Ok((p.names, p.values))
}

#[pyfunction]
#[pyo3(signature = (link, alpha, u_max=30.0))]
fn condition_probe<'py>(py: Python<'py>, link: &str, alpha: f64, u_max: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = inference::condition_probe(link_of(link)?, alpha, u_max).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("ml_beta_bounded", r.ml_beta_bounded)?;
    d.set_item("ml_delta_bounded", r.ml_delta_bounded)?;
    d.set_item("redescending", r.redescending)?;
    d.set_item("u", r.rows.iter().map(|x| x.u).collect::<Vec<_>>())?;
    d.set_item("g_alpha_u", r.rows.iter().map(|x| x.g_alpha_u).collect::<Vec<_>>())?;
    d.set_item("abs_dlog", r.rows.iter().map(|x| x.abs_dlog).collect::<Vec<_>>())?;
    d.set_item("abs_u_dlog", r.rows.iter().map(|x| x.abs_u_dlog).collect::<Vec<_>>())?;
    Ok(d)
}

#[pyfunction]
fn generalized_residuals<'py>(
    py: Python<'py>,
    params: &PyParams,
    link: &str,
    data: &PyDataset,
) -> PyResult<Bound<'py, PyDict>> {
    let r = generalized_residuals_at(&params.inner, link_of(link)?, &data.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("residuals", r.residuals)?;
    d.set_item("band95", r.band95)?;
    d.set_item("band99", r.band99)?;
    d.set_item("flagged", r.flagged)?;
    Ok(d)
}

/// `(coefficient distance, cutpoint distance)`.
#[pyfunction]
fn distance(a: &PyParams, b: &PyParams) -> PyResult<(f64, f64)> {
    distance_rs(&a.inner, &b.inner).map_err(to_py)
}

/// Contamination study. `methods` is a list of `(name, tuning)` pairs; the
/// result is one dict per method with `label`, `names`, `bias`, `mse`, `ccr`.
#[pyfunction]
#[pyo3(signature = (error_dist="normal", methods=None, n=200, outlier_frac=0.0, outlier_mean=20.0, replications=100, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    error_dist: &str,
    methods: Option<Vec<(String, Option<f64>)>>,
    n: usize,
    outlier_frac: f64,
    outlier_mean: f64,
    replications: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let dist: ErrorDist = serde_json::from_value(serde_json::Value::String(error_dist.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown error distribution '{error_dist}'")))?;
    let mut scn = SimScenario::standard(dist);
    scn.n = n;
    scn.outlier_frac = outlier_frac;
    scn.outlier_mean = outlier_mean;
    scn.replications = replications;
    scn.seed = seed;
    let methods = methods.unwrap_or_else(|| vec![("ml".into(), None), ("dp".into(), Some(0.3))]);
    let cfgs = methods
        .iter()
        .map(|(name, t)| Ok(FitConfig::new(method_of(name, *t)?, scn.link())))
        .collect::<PyResult<Vec<_>>>()?;
    let study = py.detach(|| sim::run_study(&scn, &cfgs)).map_err(to_py)?;
    study
        .metrics
        .into_iter()
        .map(|m| {
            let d = PyDict::new(py);
            d.set_item("label", m.label)?;
            d.set_item("names", m.names)?;
            d.set_item("bias", m.bias)?;
            d.set_item("mse", m.mse)?;
            d.set_item("ccr", m.ccr)?;
            d.set_item("n_failed", m.n_failed)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn robord_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_function(wrap_pyfunction!(pdf, m)?)?;
    m.add_function(wrap_pyfunction!(quantile, m)?)?;
    m.add_function(wrap_pyfunction!(category_probs, m)?)?;
    m.add_function(wrap_pyfunction!(neg_log_lik, m)?)?;
    m.add_function(wrap_pyfunction!(dp_objective, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_objective, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich, m)?)?;
    m.add_function(wrap_pyfunction!(wald, m)?)?;
    m.add_function(wrap_pyfunction!(influence_profile, m)?)?;
    m.add_function(wrap_pyfunction!(condition_probe, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
