//! Generalized residuals: `E[eps | y, x]` under the fitted model,
//! `r = (g(a) - g(b)) / (G(b) - G(a))` with `a = delta_{y-1} - x'beta`,
//! `b = delta_y - x'beta`. Exact for probit; a plug-in for other links.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::FitResult;
use crate::links::LinkKind;
use crate::model::{linear_predictor, Dataset, Params, RowTable};
use crate::numeric::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residuals: Vec<f64>,
    /// Empirical 2.5% and 97.5% quantiles.
    pub band95: (f64, f64),
    /// Empirical 0.5% and 99.5% quantiles.
    pub band99: (f64, f64),
    /// Rows (0-based) outside the 95% band.
    pub flagged: Vec<usize>,
}

impl ResidualReport {
    fn from_residuals(residuals: Vec<f64>) -> Self {
        let mut sorted = residuals.clone();
        sorted.sort_by(f64::total_cmp);
        let band95 = (quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975));
        let band99 = (quantile_sorted(&sorted, 0.005), quantile_sorted(&sorted, 0.995));
        let flagged = residuals
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < band95.0 || r > band95.1)
            .map(|(i, _)| i)
            .collect();
        Self {
            residuals,
            band95,
            band99,
            flagged,
        }
    }

    pub fn outside99(&self, i: usize) -> bool {
        let r = self.residuals[i];
        r < self.band99.0 || r > self.band99.1
    }

    /// CSV with columns `row, residual, outside95, outside99`; rows are 1-based.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["row", "residual", "outside95", "outside99"])?;
        let mut flagged = self.flagged.iter().peekable();
        for (i, r) in self.residuals.iter().enumerate() {
            let f95 = flagged.next_if(|&&j| j == i).is_some();
            out.write_record([
                (i + 1).to_string(),
                r.to_string(),
                u8::from(f95).to_string(),
                u8::from(self.outside99(i)).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn generalized_residuals(fit: &FitResult, data: &Dataset) -> Result<ResidualReport> {
    generalized_residuals_at(&fit.params, fit.link, data)
}

pub fn generalized_residuals_at(params: &Params, link: LinkKind, data: &Dataset) -> Result<ResidualReport> {
    params.validate()?;
    params.check_shape(data)?;
    let m = data.n_categories();
    let mut table = RowTable::new(m);
    let residuals = data
        .rows()
        .map(|(x, y)| {
            table.fill(link, &params.delta, linear_predictor(&params.beta, x), true);
            let lp = table.score_log_prob(y);
            let lower = if y > 1 { (table.log_dens[y - 2] - lp).exp() } else { 0.0 };
            let upper = if y < m { (table.log_dens[y - 1] - lp).exp() } else { 0.0 };
            lower - upper
        })
        .collect();
    Ok(ResidualReport::from_residuals(residuals))
}
