mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{probit_data, write_study_csv};

fn robord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robord")).args(args).output().unwrap()
}

fn robord_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robord"))
        .args(args)
        .env("ROBORD_THREADS", threads)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(robord(&[]).status.code(), Some(1));
    assert_eq!(robord(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(robord(&["fit", "--data"]).status.code(), Some(1));
    assert_eq!(robord(&["--help"]).status.code(), Some(0));
    assert_eq!(robord(&["--version"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = write_study_csv(&probit_data(50, 1), dir.path());
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        robord(&["fit", "--data", p(&missing), "--spec", p(&spec)])
            .status
            .code(),
        Some(2)
    );
    // dp without a tuning value
    assert_eq!(
        robord(&["fit", "--data", p(&csv), "--spec", p(&spec), "--method", "dp"])
            .status
            .code(),
        Some(2)
    );
    // decreasing cutpoints
    let out = robord(&["influence", "--delta", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn unconverged_fit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = write_study_csv(&probit_data(60, 2), dir.path());
    let out = dir.path().join("fit.json");
    let o = robord(&[
        "fit",
        "--data",
        p(&csv),
        "--spec",
        p(&spec),
        "--max-iters",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["converged"], false);
}

#[test]
fn fit_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = write_study_csv(&probit_data(120, 3), dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let res = dir.path().join("res.csv");
    let args = |out: &Path| {
        vec![
            "fit".to_string(),
            "--data".into(),
            p(&csv).into(),
            "--spec".into(),
            p(&spec).into(),
            "--method".into(),
            "dp".into(),
            "--alpha".into(),
            "0.3".into(),
            "--link".into(),
            "probit".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            p(out).into(),
        ]
    };
    let mut first = args(&a);
    first.extend(["--residuals".to_string(), p(&res).to_string()]);
    let first: Vec<&str> = first.iter().map(String::as_str).collect();
    assert_eq!(robord(&first).status.code(), Some(0));
    let second = args(&b);
    let second: Vec<&str> = second.iter().map(String::as_str).collect();
    assert_eq!(robord(&second).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["method"]["method"], "dp");
    assert_eq!(v["covariates"], serde_json::json!(["x", "d"]));
    assert_eq!(v["params"]["delta"].as_array().unwrap().len(), 4);
    assert_eq!(v["wald"]["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["covariance"]["std_errors"].as_array().unwrap().len(), 6);

    let res = std::fs::read_to_string(&res).unwrap();
    assert!(res.starts_with("row,residual,outside95,outside99\n"));
    assert_eq!(res.lines().count(), 121);
}

#[test]
fn residuals_from_stored_fit() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = write_study_csv(&probit_data(80, 4), dir.path());
    let fit = dir.path().join("fit.json");
    assert_eq!(
        robord(&["fit", "--data", p(&csv), "--spec", p(&spec), "--out", p(&fit)])
            .status
            .code(),
        Some(0)
    );
    let a = robord(&["residuals", "--data", p(&csv), "--spec", p(&spec), "--fit", p(&fit)]);
    let b = robord(&["residuals", "--data", p(&csv), "--spec", p(&spec)]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scn.json");
    std::fs::write(
        &scenario,
        r#"{"error_dist": "normal", "n": 80, "outlier_frac": 0.05, "replications": 4, "seed": 11,
            "methods": [{"method": "ml"}, {"method": "dp", "tuning": 0.3}]}"#,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(
        robord_env(&["simulate", "--scenario", p(&scenario), "--out", p(&a)], "1")
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        robord_env(&["simulate", "--scenario", p(&scenario), "--out", p(&b)], "3")
            .status
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,tuning,parameter,bias,mse");
    // 7 parameters plus a CCR row per method
    assert_eq!(lines.len(), 1 + 2 * 8);
    assert!(lines[8].starts_with("ml,,CCR,"));
    assert!(lines[9].starts_with("dp(0.3),0.3,beta1,"));
}

#[test]
fn influence_csv_covers_the_grid() {
    let out = robord(&[
        "influence",
        "--link",
        "probit",
        "--method",
        "gamma",
        "--tuning",
        "0.5",
        "--y",
        "1",
        "--grid",
        "-10:10:0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,parameter,method,psi");
    // 201 grid points, one beta and three cutpoints
    assert_eq!(lines.len(), 1 + 201 * 4);
    assert!(lines[1].starts_with("-10,beta1,gamma(0.5),"));
}

#[test]
fn probe_reports_tail_flags() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("probe.csv");
    let out = robord(&["probe", "--link", "logit", "--alpha", "0.5", "--csv", p(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ml_beta_bounded"], false);
    assert_eq!(v["redescending"], true);
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 10);
}
