//! Continuous distributions for the utility noise, plus a tabulated CDF.

use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub trait Cdf {
    fn name(&self) -> &str;

    fn cdf(&self, x: f64) -> f64;

    /// `x` with `cdf(x)` closest to `p`, by bracketed bisection.
    fn quantile(&self, p: f64) -> f64 {
        bisect_quantile(|x| self.cdf(x), p)
    }
}

fn bisect_quantile(f: impl Fn(f64) -> f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while f(lo) > p {
        lo *= 2.0;
    }
    while f(hi) < p {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (f(lo) - p).abs() < (f(hi) - p).abs() {
        lo
    } else {
        hi
    }
}

/// Standard normal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Probit;

impl Cdf for Probit {
    fn name(&self) -> &str {
        "probit"
    }

    fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        bisect_quantile(|x| self.cdf(x), p)
    }
}

/// Standard logistic, `F(x) = 1 / (1 + e^-x)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Logit;

impl Cdf for Logit {
    fn name(&self) -> &str {
        "logit"
    }

    fn cdf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }
}

/// Named noise distribution, as accepted on the command line and in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDistribution {
    Probit,
    Logit,
}

impl NoiseDistribution {
    pub fn as_cdf(self) -> &'static dyn Cdf {
        match self {
            NoiseDistribution::Probit => &Probit,
            NoiseDistribution::Logit => &Logit,
        }
    }
}

impl FromStr for NoiseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "probit" | "normal" => Ok(NoiseDistribution::Probit),
            "logit" | "logistic" => Ok(NoiseDistribution::Logit),
            other => Err(invalid(format!("unknown distribution {other:?} (expected probit or logit)"))),
        }
    }
}

impl Cdf for NoiseDistribution {
    fn name(&self) -> &str {
        self.as_cdf().name()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.as_cdf().cdf(x)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.as_cdf().quantile(p)
    }
}

/// Piecewise-linear CDF through tabulated `(x, F(x))` points, flat outside
/// the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

#[derive(Deserialize)]
struct TableRow {
    x: f64,
    cdf: f64,
}

impl TabulatedCdf {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("CDF table is empty"));
        }
        for (i, &(x, f)) in points.iter().enumerate() {
            if !x.is_finite() || !(0.0..=1.0).contains(&f) {
                return Err(Error::Data { row: i + 1, message: format!("bad CDF point ({x}, {f})") });
            }
            if i > 0 {
                let (px, pf) = points[i - 1];
                if x <= px {
                    return Err(Error::Data { row: i + 1, message: "x values must be strictly increasing".into() });
                }
                if f < pf {
                    return Err(Error::Data { row: i + 1, message: format!("CDF decreases from {pf} to {f}") });
                }
            }
        }
        let (xs, fs) = points.into_iter().unzip();
        Ok(TabulatedCdf { xs, fs })
    }

    /// Reads a CSV with header `x,cdf`.
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for (i, row) in rdr.deserialize::<TableRow>().enumerate() {
            let row = row.map_err(|e| Error::Data { row: i + 1, message: e.to_string() })?;
            points.push((row.x, row.cdf));
        }
        Self::new(points)
    }
}

impl Cdf for TabulatedCdf {
    fn name(&self) -> &str {
        "tabulated"
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.fs[0];
        }
        if x >= self.xs[n - 1] {
            return self.fs[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let (x0, x1, f0, f1) = (self.xs[i - 1], self.xs[i], self.fs[i - 1], self.fs[i]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }
}
