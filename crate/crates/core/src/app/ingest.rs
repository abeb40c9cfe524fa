//! CSV ingestion: column roles, standardization and dummy coding.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Response,
    Continuous,
    Binary,
    Categorical,
    Drop,
}

/// Role of one CSV column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
    /// Categorical/binary: the level coded as all zeros (default: first in
    /// sorted order).
    #[serde(default)]
    pub reference: Option<String>,
    /// Response: category labels from lowest to highest. Without it, the
    /// response must be numeric and its distinct values are ranked.
    #[serde(default)]
    pub levels: Option<Vec<String>>,
}

impl ColumnSpec {
    pub fn new(name: &str, role: ColumnRole) -> Self {
        Self {
            name: name.to_string(),
            role,
            reference: None,
            levels: None,
        }
    }
}

/// Parses a JSON array of [`ColumnSpec`], or an object with a `columns` array.
pub fn parse_spec(text: &str) -> Result<Vec<ColumnSpec>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Form {
        List(Vec<ColumnSpec>),
        Wrapped { columns: Vec<ColumnSpec> },
    }
    let specs = match serde_json::from_str::<Form>(text)? {
        Form::List(v) | Form::Wrapped { columns: v } => v,
    };
    check_spec(&specs)?;
    Ok(specs)
}

fn check_spec(specs: &[ColumnSpec]) -> Result<()> {
    let responses = specs.iter().filter(|s| s.role == ColumnRole::Response).count();
    if responses != 1 {
        return Err(Error::InvalidInput(format!(
            "column spec needs exactly one response column, found {responses}"
        )));
    }
    let mut seen = BTreeSet::new();
    for s in specs {
        if !seen.insert(&s.name) {
            return Err(Error::InvalidInput(format!(
                "column '{}' appears twice in the column spec",
                s.name
            )));
        }
    }
    Ok(())
}

/// How one spec column becomes design columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Encoding {
    Continuous {
        mean: f64,
        sd: f64,
    },
    /// Value equal to `one` maps to 1, `zero` to 0.
    Binary {
        zero: String,
        one: String,
    },
    /// One indicator per non-reference level.
    Categorical {
        reference: String,
        levels: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnEncoding {
    pub name: String,
    pub encoding: Encoding,
}

/// Everything learned from the training file; applying it to the same file
/// reproduces the training dataset exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub response: String,
    /// Response labels in category order (category `k` is `levels[k-1]`).
    pub response_levels: Vec<String>,
    pub columns: Vec<ColumnEncoding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    /// Names of the design columns, in order.
    pub design_names: Vec<String>,
    pub preprocessor: Preprocessor,
}

struct Table {
    path: PathBuf,
    header: Vec<String>,
    /// `(file line, cells)`
    records: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
        let header = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            records.push((line, rec.iter().map(|c| c.trim().to_string()).collect()));
        }
        Ok(Self {
            path: path.to_path_buf(),
            header,
            records,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| Error::Data {
            path: self.path.clone(),
            row: 1,
            column: name.to_string(),
            message: "column not found in header".into(),
        })
    }

    fn err(&self, line: usize, column: &str, message: String) -> Error {
        Error::Data {
            path: self.path.clone(),
            row: line,
            column: column.to_string(),
            message,
        }
    }

    fn cells<'a>(&'a self, col: usize, name: &'a str) -> impl Iterator<Item = Result<(usize, &'a str)>> + 'a {
        self.records.iter().map(move |(line, r)| match r.get(col) {
            Some(c) if !c.is_empty() => Ok((*line, c.as_str())),
            _ => Err(self.err(*line, name, "missing value".into())),
        })
    }

    fn numbers(&self, col: usize, name: &str) -> Result<Vec<f64>> {
        self.cells(col, name)
            .map(|c| {
                let (line, v) = c?;
                match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(self.err(line, name, format!("'{v}' is not a finite number"))),
                }
            })
            .collect()
    }

    fn levels(&self, col: usize, name: &str) -> Result<Vec<String>> {
        let mut set = BTreeSet::new();
        for c in self.cells(col, name) {
            set.insert(c?.1.to_string());
        }
        Ok(set.into_iter().collect())
    }
}

/// Reads `path`, learns the encodings described by `spec` and builds the
/// dataset. Continuous columns are standardized with the sample mean and the
/// `n - 1` standard deviation.
pub fn load_csv(path: &Path, spec: &[ColumnSpec]) -> Result<LoadedData> {
    check_spec(spec)?;
    let table = Table::read(path)?;
    if table.records.is_empty() {
        return Err(table.err(2, "", "file has no data rows".into()));
    }
    let mut response = None;
    let mut columns = Vec::new();
    for s in spec {
        let col = table.column(&s.name)?;
        match s.role {
            ColumnRole::Drop => {}
            ColumnRole::Response => response = Some(learn_response(&table, col, s)?),
            ColumnRole::Continuous => {
                let v = table.numbers(col, &s.name)?;
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
                let sd = var.sqrt();
                if !(sd > 0.0) || !sd.is_finite() {
                    return Err(table.err(1, &s.name, "continuous column has zero standard deviation".into()));
                }
                columns.push(ColumnEncoding {
                    name: s.name.clone(),
                    encoding: Encoding::Continuous { mean, sd },
                });
            }
            ColumnRole::Binary => {
                let levels = table.levels(col, &s.name)?;
                let (zero, one) = binary_levels(&levels, s.reference.as_deref()).ok_or_else(|| {
                    table.err(
                        1,
                        &s.name,
                        format!("binary column needs at most two values, found {levels:?}"),
                    )
                })?;
                columns.push(ColumnEncoding {
                    name: s.name.clone(),
                    encoding: Encoding::Binary { zero, one },
                });
            }
            ColumnRole::Categorical => {
                let levels = table.levels(col, &s.name)?;
                let reference = s.reference.clone().unwrap_or_else(|| levels[0].clone());
                if !levels.contains(&reference) {
                    return Err(table.err(1, &s.name, format!("reference level '{reference}' does not occur")));
                }
                let levels = levels.into_iter().filter(|l| *l != reference).collect();
                columns.push(ColumnEncoding {
                    name: s.name.clone(),
                    encoding: Encoding::Categorical { reference, levels },
                });
            }
        }
    }
    let (name, response_levels) = response.expect("spec checked for a response column");
    let pre = Preprocessor {
        response: name,
        response_levels,
        columns,
    };
    let (dataset, design_names) = pre.apply_table(&table)?;
    Ok(LoadedData {
        dataset,
        design_names,
        preprocessor: pre,
    })
}

fn binary_levels(levels: &[String], reference: Option<&str>) -> Option<(String, String)> {
    let is_num = |s: &str| s.parse::<f64>().ok();
    match levels.len() {
        2 => {
            let (a, b) = (levels[0].clone(), levels[1].clone());
            match reference {
                Some(r) if r == b => Some((b, a)),
                Some(r) if r != a => None,
                _ => {
                    // numeric 0/1 style columns keep their order
                    match (is_num(&a), is_num(&b)) {
                        (Some(x), Some(y)) if y < x => Some((b, a)),
                        _ => Some((a, b)),
                    }
                }
            }
        }
        1 => {
            let v = levels[0].clone();
            match is_num(&v) {
                Some(0.0) => Some((v, "1".into())),
                Some(1.0) => Some(("0".into(), v)),
                _ => None,
            }
        }
        _ => None,
    }
}

fn learn_response(table: &Table, col: usize, s: &ColumnSpec) -> Result<(String, Vec<String>)> {
    let present = table.levels(col, &s.name)?;
    let levels = match &s.levels {
        Some(levels) => {
            if let Some(v) = present.iter().find(|v| !levels.contains(v)) {
                return Err(table.err(
                    1,
                    &s.name,
                    format!("response value '{v}' is not among the listed levels"),
                ));
            }
            if let Some(gap) = levels.iter().position(|l| !present.contains(l)) {
                return Err(table.err(
                    1,
                    &s.name,
                    format!("response category {} ('{}') has no rows", gap + 1, levels[gap]),
                ));
            }
            levels.clone()
        }
        None => {
            let mut numeric = Vec::with_capacity(present.len());
            for v in &present {
                let x = v.parse::<f64>().map_err(|_| {
                    table.err(
                        1,
                        &s.name,
                        format!("response value '{v}' is not numeric; list the category order in 'levels'"),
                    )
                })?;
                numeric.push((x, v.clone()));
            }
            numeric.sort_by(|a, b| a.0.total_cmp(&b.0));
            numeric.into_iter().map(|(_, v)| v).collect()
        }
    };
    if levels.len() < 2 {
        return Err(table.err(1, &s.name, "response needs at least two categories".into()));
    }
    Ok((s.name.clone(), levels))
}

impl Preprocessor {
    pub fn design_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for c in &self.columns {
            match &c.encoding {
                Encoding::Continuous { .. } | Encoding::Binary { .. } => names.push(c.name.clone()),
                Encoding::Categorical { levels, .. } => {
                    names.extend(levels.iter().map(|l| format!("{}={}", c.name, l)));
                }
            }
        }
        names
    }

    /// Encodes a new file with the stored parameters.
    pub fn apply(&self, path: &Path) -> Result<Dataset> {
        Ok(self.apply_table(&Table::read(path)?)?.0)
    }

    fn apply_table(&self, table: &Table) -> Result<(Dataset, Vec<String>)> {
        let names = self.design_names();
        let n = table.records.len();
        let p = names.len();
        if p == 0 {
            return Err(Error::InvalidInput("column spec selects no covariates".into()));
        }
        let rcol = table.column(&self.response)?;
        let mut y = Vec::with_capacity(n);
        for c in table.cells(rcol, &self.response) {
            let (line, v) = c?;
            let code = self
                .response_code(v)
                .ok_or_else(|| table.err(line, &self.response, format!("unknown response value '{v}'")))?;
            y.push(code);
        }
        let mut x = vec![0.0; n * p];
        let mut offset = 0;
        for c in &self.columns {
            let col = table.column(&c.name)?;
            match &c.encoding {
                Encoding::Continuous { mean, sd } => {
                    for (i, v) in table.numbers(col, &c.name)?.into_iter().enumerate() {
                        x[i * p + offset] = (v - mean) / sd;
                    }
                    offset += 1;
                }
                Encoding::Binary { zero, one } => {
                    for (i, cell) in table.cells(col, &c.name).enumerate() {
                        let (line, v) = cell?;
                        x[i * p + offset] = if v == one || same_number(v, one) {
                            1.0
                        } else if v == zero || same_number(v, zero) {
                            0.0
                        } else {
                            return Err(table.err(line, &c.name, format!("'{v}' is neither '{zero}' nor '{one}'")));
                        };
                    }
                    offset += 1;
                }
                Encoding::Categorical { reference, levels } => {
                    for (i, cell) in table.cells(col, &c.name).enumerate() {
                        let (line, v) = cell?;
                        if let Some(k) = levels.iter().position(|l| l == v) {
                            x[i * p + offset + k] = 1.0;
                        } else if v != reference {
                            return Err(table.err(line, &c.name, format!("unknown level '{v}'")));
                        }
                    }
                    offset += levels.len();
                }
            }
        }
        let data = Dataset::from_flat(y, x, p, self.response_levels.len())?;
        Ok((data, names))
    }

    fn response_code(&self, v: &str) -> Option<usize> {
        self.response_levels
            .iter()
            .position(|l| l == v || same_number(l, v))
            .map(|k| k + 1)
    }
}

fn same_number(a: &str, b: &str) -> bool {
    matches!((a.parse::<f64>(), b.parse::<f64>()), (Ok(x), Ok(y)) if x == y)
}
