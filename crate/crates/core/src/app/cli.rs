//! `robord` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 convergence failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::app::ingest::{load_csv, parse_spec, Preprocessor};
use crate::app::residuals::{generalized_residuals_at, ResidualReport};
use crate::app::write_atomic;
use crate::error::{Error, Result};
use crate::estimate::{fit, FitConfig, FitResult};
use crate::inference::{
    condition_probe, influence_profile, parse_grid, sandwich, wald, SandwichCov, WaldResult, DEFAULT_FD_STEP,
};
use crate::links::LinkKind;
use crate::model::{Dataset, Method, Params};
use crate::sim::{run_study, StudySpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "robord", version, about = "Robust estimation for ordinal response models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to a CSV file and write a JSON result.
    Fit(FitArgs),
    /// Run a contamination simulation study and write a metrics CSV.
    Simulate(SimulateArgs),
    /// Write psi values along a covariate grid as CSV.
    Influence(InfluenceArgs),
    /// Fit (or load a fit) and write generalized residuals as CSV.
    Residuals(ResidualArgs),
    /// Report the tail conditions of a link as JSON.
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Args)]
struct MethodArgs {
    /// ml, dp or gamma.
    #[arg(long, default_value = "ml")]
    method: String,
    /// Tuning parameter for dp or gamma.
    #[arg(long)]
    tuning: Option<f64>,
    /// Same as --tuning (for dp).
    #[arg(long)]
    alpha: Option<f64>,
    /// Same as --tuning (for gamma).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "probit")]
    link: LinkKind,
}

impl MethodArgs {
    fn method(&self) -> Result<Method> {
        let tuning = self.tuning.or(self.alpha).or(self.gamma);
        Method::from_name(&self.method, tuning)
    }
}

#[derive(Debug, Clone, Args)]
struct OptimArgs {
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 2)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the extra start from an ML fit on covariate-trimmed rows (dp, gamma).
    #[arg(long)]
    no_robust_start: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// JSON column spec.
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    optim: OptimArgs,
    /// Output JSON (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write generalized residuals to this CSV.
    #[arg(long)]
    residuals: Option<PathBuf>,
    /// Relative finite-difference step for the sandwich Jacobian.
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    fd_step: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Override the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct InfluenceArgs {
    #[command(flatten)]
    method: MethodArgs,
    /// Observed category.
    #[arg(long, default_value_t = 1)]
    y: usize,
    /// start:stop:step
    #[arg(long, default_value = "-10:10:0.1", allow_hyphen_values = true)]
    grid: String,
    /// Comma-separated coefficients.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    beta: String,
    /// Comma-separated cutpoints.
    #[arg(long, default_value = "-1.5,0.5,1.5", allow_hyphen_values = true)]
    delta: String,
    /// 0-based index of the covariate to vary.
    #[arg(long, default_value_t = 0)]
    covariate: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResidualArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    /// Use the parameters of a JSON file written by `fit` instead of fitting.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    optim: OptimArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long, default_value = "probit")]
    link: LinkKind,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    #[arg(long, default_value_t = 30.0)]
    u_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the probe grid as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFiniteObjective(_) | Error::SingularJacobian(_) | Error::TooManyFailures { .. } => EXIT_CONVERGENCE,
        _ => EXIT_DATA,
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Influence(a) => cmd_influence(a),
        Command::Residuals(a) => cmd_residuals(a),
        Command::Probe(a) => cmd_probe(a),
    }
}

fn emit(out: Option<&Path>, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, fill),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn load(data: &Path, spec: &Path) -> Result<(Dataset, Vec<String>, Preprocessor)> {
    let text = std::fs::read_to_string(spec)?;
    let spec = parse_spec(&text)?;
    let loaded = load_csv(data, &spec)?;
    Ok((loaded.dataset, loaded.design_names, loaded.preprocessor))
}

fn fit_config(m: &MethodArgs, o: &OptimArgs) -> Result<FitConfig> {
    let cfg = FitConfig {
        method: m.method()?,
        link: m.link,
        max_iters: o.max_iters,
        obj_tol: o.tol,
        n_restarts: o.restarts,
        seed: o.seed,
        robust_start: !o.no_robust_start,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct CovarianceOut {
    names: Vec<String>,
    std_errors: Vec<f64>,
    m_hat: Vec<Vec<f64>>,
    q_hat: Vec<Vec<f64>>,
    v_hat: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    info_gap: Option<f64>,
}

impl From<&SandwichCov> for CovarianceOut {
    fn from(c: &SandwichCov) -> Self {
        Self {
            names: c.names.clone(),
            std_errors: c.std_errors(),
            m_hat: SandwichCov::rows(&c.m_hat),
            q_hat: SandwichCov::rows(&c.q_hat),
            v_hat: SandwichCov::rows(&c.v_hat),
            info_gap: c.info_gap,
        }
    }
}

#[derive(Serialize)]
struct FitOut<'a> {
    method: Method,
    link: LinkKind,
    covariates: &'a [String],
    response_levels: &'a [String],
    params: &'a Params,
    objective: f64,
    converged: bool,
    iterations: usize,
    n: usize,
    covariance: Option<CovarianceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance_error: Option<String>,
    wald: Option<WaldResult>,
    preprocessing: &'a Preprocessor,
}

fn cmd_fit(a: FitArgs) -> Result<i32> {
    let cfg = fit_config(&a.method, &a.optim)?;
    let (data, names, pre) = load(&a.data, &a.spec)?;
    let result = fit(&data, &cfg)?;
    let (covariance, covariance_error, wald_out) = if result.converged {
        match sandwich(cfg.method, &result, &data, a.fd_step) {
            Ok(cov) => {
                let w = wald(&result, &cov, &data).ok();
                (Some(CovarianceOut::from(&cov)), None, w)
            }
            Err(e) => (None, Some(e.to_string()), None),
        }
    } else {
        (None, Some("fit did not converge".into()), None)
    };
    let out = FitOut {
        method: result.method,
        link: result.link,
        covariates: &names,
        response_levels: &pre.response_levels,
        params: &result.params,
        objective: result.objective,
        converged: result.converged,
        iterations: result.iterations,
        n: data.n_rows(),
        covariance,
        covariance_error,
        wald: wald_out,
        preprocessing: &pre,
    };
    emit(a.out.as_deref(), |w| write_json(w, &out))?;
    if let Some(path) = &a.residuals {
        let report = generalized_residuals_at(&result.params, result.link, &data)?;
        write_atomic(path, |w| report.write_csv(w))?;
    }
    Ok(converged_code(&result))
}

fn converged_code(r: &FitResult) -> i32 {
    if r.converged {
        EXIT_OK
    } else {
        eprintln!(
            "error: optimizer stopped after {} iterations without converging",
            r.iterations
        );
        EXIT_CONVERGENCE
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let mut spec = StudySpec::from_json(&std::fs::read_to_string(&a.scenario)?)?;
    if let Some(r) = a.replications {
        spec.scenario.replications = r;
    }
    if let Some(s) = a.seed {
        spec.scenario.seed = s;
    }
    let methods = spec.fit_configs()?;
    let study = run_study(&spec.scenario, &methods)?;
    for m in &study.metrics {
        if m.n_failed > 0 || m.n_unconverged > 0 {
            eprintln!(
                "{}: {} failed, {} unconverged of {}",
                m.label, m.n_failed, m.n_unconverged, spec.scenario.replications
            );
        }
    }
    write_atomic(&a.out, |w| study.write_csv(w))?;
    Ok(EXIT_OK)
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("'{s}' is not a number")))
        })
        .collect()
}

fn cmd_influence(a: InfluenceArgs) -> Result<i32> {
    let method = a.method.method()?;
    let params = Params::new(parse_list(&a.beta)?, parse_list(&a.delta)?)?;
    let grid = parse_grid(&a.grid)?;
    let profile = influence_profile(method, &params, a.method.link, a.y, &grid, a.covariate)?;
    emit(a.out.as_deref(), |w| profile.write_csv(w))?;
    Ok(EXIT_OK)
}

fn cmd_residuals(a: ResidualArgs) -> Result<i32> {
    let (data, _, _) = load(&a.data, &a.spec)?;
    let (params, link, code) = match &a.fit {
        Some(path) => {
            #[derive(serde::Deserialize)]
            struct Stored {
                params: Params,
                link: LinkKind,
            }
            let stored: Stored = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            (stored.params, stored.link, EXIT_OK)
        }
        None => {
            let cfg = fit_config(&a.method, &a.optim)?;
            let r = fit(&data, &cfg)?;
            let code = converged_code(&r);
            (r.params, r.link, code)
        }
    };
    let report: ResidualReport = generalized_residuals_at(&params, link, &data)?;
    emit(a.out.as_deref(), |w| report.write_csv(w))?;
    Ok(code)
}

fn cmd_probe(a: ProbeArgs) -> Result<i32> {
    let report = condition_probe(a.link, a.alpha, a.u_max)?;
    emit(a.out.as_deref(), |w| write_json(w, &report))?;
    if let Some(path) = &a.csv {
        write_atomic(path, |w| report.write_csv(w))?;
    }
    Ok(EXIT_OK)
}
