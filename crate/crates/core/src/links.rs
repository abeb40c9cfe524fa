//! Cumulative link families.
//!
//! Each link is the CDF `G` of the latent error together with its density
//! `g` and quantile. Infinite arguments are treated as explicit sentinels:
//! `G(-inf) = 0`, `G(+inf) = 1`, `g(+-inf) = 0`.
//!
//! Besides the plain functions every link exposes `ln G` and `ln(1 - G)`
//! evaluated directly in log space, which is what the model code uses for
//! category probabilities so that far-tail ratios such as `g/G` remain exact.

mod normal;

use std::f64::consts::{FRAC_1_PI, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use normal::erfc;
pub(crate) use normal::log1mexp;

const LN_PI: f64 = 1.144_729_885_849_400_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    /// Standard normal.
    Probit,
    /// Standard logistic.
    Logit,
    /// Gumbel (maximum): `G(u) = exp(-exp(-u))`, right-skewed.
    LogLog,
    /// `G(u) = 1 - exp(-exp(u))`.
    CLogLog,
    /// Standard Cauchy.
    Cauchit,
}

impl LinkKind {
    pub const ALL: [LinkKind; 5] = [
        LinkKind::Probit,
        LinkKind::Logit,
        LinkKind::LogLog,
        LinkKind::CLogLog,
        LinkKind::Cauchit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Probit => "probit",
            LinkKind::Logit => "logit",
            LinkKind::LogLog => "loglog",
            LinkKind::CLogLog => "cloglog",
            LinkKind::Cauchit => "cauchit",
        }
    }

    /// Links whose error density is symmetric about zero.
    pub fn is_symmetric(self) -> bool {
        matches!(self, LinkKind::Probit | LinkKind::Logit | LinkKind::Cauchit)
    }

    /// `G(u)`.
    pub fn cdf(self, u: f64) -> f64 {
        if u == f64::NEG_INFINITY {
            return 0.0;
        }
        if u == f64::INFINITY {
            return 1.0;
        }
        match self {
            LinkKind::Probit => normal::cdf(u),
            LinkKind::Logit => logistic(u),
            LinkKind::LogLog => (-(-u).exp()).exp(),
            LinkKind::CLogLog => -(-u.exp()).exp_m1(),
            LinkKind::Cauchit => cauchy_lower(u),
        }
    }

    /// `1 - G(u)`, computed without cancellation.
    pub fn sf(self, u: f64) -> f64 {
        if u == f64::NEG_INFINITY {
            return 1.0;
        }
        if u == f64::INFINITY {
            return 0.0;
        }
        match self {
            LinkKind::Probit => normal::cdf(-u),
            LinkKind::Logit => logistic(-u),
            LinkKind::LogLog => -(-(-u).exp()).exp_m1(),
            LinkKind::CLogLog => (-u.exp()).exp(),
            LinkKind::Cauchit => cauchy_lower(-u),
        }
    }

    /// `g(u)`.
    pub fn pdf(self, u: f64) -> f64 {
        if u.is_infinite() {
            return 0.0;
        }
        match self {
            LinkKind::Logit => {
                let e = (-u.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            LinkKind::Cauchit => FRAC_1_PI / (1.0 + u * u),
            _ => self.log_pdf(u).exp(),
        }
    }

    /// `ln g(u)`; `-inf` at the infinite sentinels.
    pub fn log_pdf(self, u: f64) -> f64 {
        if u.is_infinite() {
            return f64::NEG_INFINITY;
        }
        match self {
            LinkKind::Probit => normal::log_pdf(u),
            LinkKind::Logit => -u.abs() - 2.0 * (-u.abs()).exp().ln_1p(),
            LinkKind::LogLog => -u - (-u).exp(),
            LinkKind::CLogLog => u - u.exp(),
            LinkKind::Cauchit => {
                let a = u.abs();
                if a > 1.0 {
                    -LN_PI - 2.0 * a.ln() - (1.0 / (a * a)).ln_1p()
                } else {
                    -LN_PI - (a * a).ln_1p()
                }
            }
        }
    }

    /// `(ln G(u), ln(1 - G(u)))`.
    pub fn log_cdf_sf(self, u: f64) -> (f64, f64) {
        if u == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, 0.0);
        }
        if u == f64::INFINITY {
            return (0.0, f64::NEG_INFINITY);
        }
        match self {
            LinkKind::Probit => normal::log_cdf_sf(u),
            LinkKind::Logit => (-softplus(-u), -softplus(u)),
            LinkKind::LogLog => {
                let lc = -(-u).exp();
                (lc, log1mexp(lc))
            }
            LinkKind::CLogLog => {
                let ls = -u.exp();
                (log1mexp(ls), ls)
            }
            LinkKind::Cauchit => (cauchy_lower(u).ln(), cauchy_lower(-u).ln()),
        }
    }

    /// `G^{-1}(q)` with `quantile(0) = -inf` and `quantile(1) = +inf`.
    pub fn quantile(self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidInput(format!(
                "quantile level must lie in [0, 1], got {q}"
            )));
        }
        if q == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if q == 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(match self {
            LinkKind::Probit => normal::quantile(q),
            LinkKind::Logit => q.ln() - (-q).ln_1p(),
            LinkKind::LogLog => -(-q.ln()).ln(),
            LinkKind::CLogLog => (-(-q).ln_1p()).ln(),
            LinkKind::Cauchit => (PI * (q - 0.5)).tan(),
        })
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probit" => Ok(LinkKind::Probit),
            "logit" => Ok(LinkKind::Logit),
            "loglog" => Ok(LinkKind::LogLog),
            "cloglog" => Ok(LinkKind::CLogLog),
            "cauchit" => Ok(LinkKind::Cauchit),
            other => Err(Error::InvalidInput(format!(
                "unknown link '{other}' (expected probit, logit, loglog, cloglog or cauchit)"
            ))),
        }
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)`.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Cauchy CDF, accurate in the lower tail.
fn cauchy_lower(u: f64) -> f64 {
    if u < -1.0 {
        (-1.0 / u).atan() * FRAC_1_PI
    } else {
        0.5 + u.atan() * FRAC_1_PI
    }
}
