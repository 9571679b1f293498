//! Regression estimators fitted from scratch.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::Matrix;
use crate::sem::Dataset;

mod curve;
mod logistic;
mod ols;

pub use curve::{forest_rows, partial_curve, ForestRow, PartialCurve};
pub use logistic::{fit_logistic, IrlsOptions, LogisticFit};
pub use ols::{fit_ols, OlsFit};

/// Name used for the intercept term in fit reports.
pub const INTERCEPT: &str = "(Intercept)";

/// Designs whose smallest/largest singular value ratio falls below this are
/// rejected as collinear.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimationError {
    UnknownColumn(String),
    InsufficientData {
        n: usize,
        p: usize,
    },
    RankDeficient {
        ratio: f64,
    },
    /// Residuals are numerically zero (the outcome is a linear function of the regressors).
    PerfectFit,
    NotBinary {
        column: String,
        value: f64,
    },
    Separation(String),
    UnknownRegressor(String),
    TermMissing {
        fit: String,
        term: String,
    },
    InvalidGrid(usize),
    NonFinite(String),
}

impl EstimationError {
    /// Stable variant name for machine-readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            EstimationError::UnknownColumn(_) => "UnknownColumn",
            EstimationError::InsufficientData { .. } => "InsufficientData",
            EstimationError::RankDeficient { .. } => "RankDeficient",
            EstimationError::PerfectFit => "PerfectFit",
            EstimationError::NotBinary { .. } => "NotBinary",
            EstimationError::Separation(_) => "Separation",
            EstimationError::UnknownRegressor(_) => "UnknownRegressor",
            EstimationError::TermMissing { .. } => "TermMissing",
            EstimationError::InvalidGrid(_) => "InvalidGrid",
            EstimationError::NonFinite(_) => "NonFinite",
        }
    }
}

impl fmt::Display for EstimationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimationError::UnknownColumn(c) => write!(f, "unknown column {c}"),
            EstimationError::InsufficientData { n, p } => {
                write!(f, "{n} observations cannot identify {p} coefficients")
            }
            EstimationError::RankDeficient { ratio } => {
                write!(f, "collinear design (singular value ratio {ratio:e})")
            }
            EstimationError::PerfectFit => f.write_str("outcome is fitted exactly; residual variance is zero"),
            EstimationError::NotBinary { column, value } => {
                write!(f, "outcome {column} is not binary (found {value})")
            }
            EstimationError::Separation(why) => write!(f, "separation: {why}"),
            EstimationError::UnknownRegressor(r) => write!(f, "{r} is not a regressor of this fit"),
            EstimationError::TermMissing { fit, term } => write!(f, "term {term} missing from fit {fit}"),
            EstimationError::InvalidGrid(g) => write!(f, "grid needs at least 2 points, got {g}"),
            EstimationError::NonFinite(c) => write!(f, "column {c} contains non-finite values"),
        }
    }
}

impl core::error::Error for EstimationError {}

/// Outcome vector and intercept-first design matrix.
pub(crate) struct Design {
    pub y: Vec<f64>,
    pub x: Matrix,
    pub terms: Vec<String>,
}

pub(crate) fn design<S: AsRef<str>>(
    data: &Dataset,
    outcome: &str,
    regressors: &[S],
) -> Result<Design, EstimationError> {
    let fetch = |name: &str| -> Result<&[f64], EstimationError> {
        let col = data
            .column(name)
            .map_err(|_| EstimationError::UnknownColumn(name.into()))?;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(EstimationError::NonFinite(name.into()));
        }
        Ok(col)
    };
    let y = fetch(outcome)?.to_vec();
    let ones = alloc::vec![1.0; data.n()];
    let mut cols: Vec<&[f64]> = Vec::with_capacity(regressors.len() + 1);
    cols.push(&ones);
    let mut terms = Vec::with_capacity(regressors.len() + 1);
    terms.push(String::from(INTERCEPT));
    for r in regressors {
        cols.push(fetch(r.as_ref())?);
        terms.push(String::from(r.as_ref()));
    }
    let (n, p) = (data.n(), cols.len());
    if n <= p {
        return Err(EstimationError::InsufficientData { n, p });
    }
    Ok(Design {
        y,
        x: Matrix::from_columns(&cols),
        terms,
    })
}

pub(crate) fn formula(outcome: &str, terms: &[String]) -> String {
    let mut s = String::from(outcome);
    s.push_str(" ~ ");
    let rhs: Vec<&str> = terms.iter().skip(1).map(String::as_str).collect();
    if rhs.is_empty() {
        s.push('1');
    } else {
        s.push_str(&rhs.join(" + "));
    }
    s
}

/// Score vector `Xᵀ(y − μ)` of the logistic log-likelihood at `beta`
/// (intercept first) on the raw regressors.
pub fn logistic_score<S: AsRef<str>>(
    data: &Dataset,
    outcome: &str,
    regressors: &[S],
    beta: &[f64],
) -> Result<Vec<f64>, EstimationError> {
    let d = design(data, outcome, regressors)?;
    assert_eq!(beta.len(), d.x.cols(), "coefficient count mismatch");
    Ok(logistic::score(&d.x, &d.y, beta))
}
