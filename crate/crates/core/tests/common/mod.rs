#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use robord::sim::{replication_data, ErrorDist, SimScenario};
use robord::Dataset;

/// Clean probit training data from the standard three-column design.
pub fn probit_data(n: usize, seed: u64) -> Dataset {
    let mut scn = SimScenario::standard(ErrorDist::Normal);
    scn.n = n;
    scn.seed = seed;
    replication_data(&scn, 0).unwrap().0
}

/// Same design with `frac` of the rows contaminated at `N(mean, 1)`.
pub fn contaminated_data(n: usize, seed: u64, frac: f64, mean: f64) -> Dataset {
    let mut scn = SimScenario::standard(ErrorDist::Normal);
    scn.n = n;
    scn.seed = seed;
    scn.outlier_frac = frac;
    scn.outlier_mean = mean;
    replication_data(&scn, 0).unwrap().0
}

/// Writes `data` as `y,x,d` CSV (the interaction column is left out) and
/// the matching column spec.
pub fn write_study_csv(data: &Dataset, dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut text = String::from("y,x,d\n");
    for (row, y) in data.rows() {
        writeln!(text, "{},{},{}", y, row[0], row[1]).unwrap();
    }
    let csv = dir.join("data.csv");
    std::fs::write(&csv, text).unwrap();
    let spec = dir.join("spec.json");
    std::fs::write(
        &spec,
        r#"[{"name": "y", "role": "response"},
            {"name": "x", "role": "continuous"},
            {"name": "d", "role": "binary"}]"#,
    )
    .unwrap();
    (csv, spec)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
