use alloc::string::String;
use alloc::vec::Vec;

use super::{EstimationError, LogisticFit, OlsFit};
use crate::sem::Dataset;
use crate::stats::{self, Z_95};

/// Predicted outcome along one regressor with the others held at their
/// medians, with pointwise 95% bands.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartialCurve {
    pub focal: String,
    pub grid: Vec<f64>,
    pub predicted: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Values the non-focal regressors were pinned to, in fit order.
    pub pinned: Vec<(String, f64)>,
}

pub fn partial_curve(
    fit: &OlsFit,
    data: &Dataset,
    focal: &str,
    grid_size: usize,
) -> Result<PartialCurve, EstimationError> {
    let focal_idx = fit
        .terms
        .iter()
        .skip(1)
        .position(|t| t == focal)
        .map(|i| i + 1)
        .ok_or_else(|| EstimationError::UnknownRegressor(focal.into()))?;
    if grid_size < 2 {
        return Err(EstimationError::InvalidGrid(grid_size));
    }
    let column = |name: &str| {
        data.column(name)
            .map_err(|_| EstimationError::UnknownColumn(name.into()))
    };
    let xs = column(focal)?;
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));

    let mut base = alloc::vec![0.0; fit.p];
    base[0] = 1.0;
    let mut pinned = Vec::new();
    for (j, term) in fit.terms.iter().enumerate().skip(1) {
        if j != focal_idx {
            let m = stats::median(column(term)?);
            base[j] = m;
            pinned.push((term.clone(), m));
        }
    }

    let last = (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| {
            if i + 1 == grid_size {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect();
    let mut predicted = Vec::with_capacity(grid_size);
    let mut ci_low = Vec::with_capacity(grid_size);
    let mut ci_high = Vec::with_capacity(grid_size);
    let mut x = base;
    for &g in &grid {
        x[focal_idx] = g;
        let yhat: f64 = x.iter().zip(&fit.coefficients).map(|(a, b)| a * b).sum();
        let v = fit.covariance.matvec(&x);
        let se = libm::sqrt(x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().max(0.0));
        predicted.push(yhat);
        ci_low.push(yhat - Z_95 * se);
        ci_high.push(yhat + Z_95 * se);
    }
    Ok(PartialCurve {
        focal: focal.into(),
        grid,
        predicted,
        ci_low,
        ci_high,
        pinned,
    })
}

/// One forest-plot row: a fit's odds ratio for a term with its interval.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForestRow {
    pub label: String,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn forest_rows(fits: &[LogisticFit], term: &str) -> Result<Vec<ForestRow>, EstimationError> {
    fits.iter()
        .map(|f| {
            let missing = || EstimationError::TermMissing {
                fit: f.formula(),
                term: term.into(),
            };
            let odds_ratio = f.odds_ratio(term).ok_or_else(missing)?;
            let (ci_low, ci_high) = f.ci(term).ok_or_else(missing)?;
            Ok(ForestRow {
                label: f.formula(),
                odds_ratio,
                ci_low,
                ci_high,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_ols;
    use alloc::vec;

    fn data() -> Dataset {
        let x: Vec<f64> = (0..30).map(|i| f64::from(i) / 3.0).collect();
        let z: Vec<f64> = (0..30).map(|i| f64::from((i * 7) % 11)).collect();
        let y: Vec<f64> = x
            .iter()
            .zip(&z)
            .enumerate()
            .map(|(i, (a, b))| 1.0 - 0.7 * a + 0.2 * b + (i % 3) as f64 - 1.0)
            .collect();
        Dataset::from_columns(vec![("x", x), ("z", z), ("y", y)]).unwrap()
    }

    #[test]
    fn two_point_grid_is_the_range() {
        let d = data();
        let fit = fit_ols(&d, "y", &["x", "z"]).unwrap();
        let c = partial_curve(&fit, &d, "x", 2).unwrap();
        assert_eq!(c.grid, [0.0, 29.0 / 3.0]);
    }

    #[test]
    fn slope_equals_coefficient_and_band_brackets() {
        let d = data();
        let fit = fit_ols(&d, "y", &["x", "z"]).unwrap();
        let c = partial_curve(&fit, &d, "x", 11).unwrap();
        let b = fit.coef("x").unwrap();
        for i in 1..c.grid.len() {
            let slope = (c.predicted[i] - c.predicted[i - 1]) / (c.grid[i] - c.grid[i - 1]);
            assert!((slope - b).abs() < 1e-9);
        }
        for i in 0..c.grid.len() {
            assert!(c.ci_low[i] <= c.predicted[i] && c.predicted[i] <= c.ci_high[i]);
        }
        assert_eq!(c.pinned.len(), 1);
        assert_eq!(c.pinned[0].1, stats::median(d.column("z").unwrap()));
    }

    #[test]
    fn curve_errors() {
        let d = data();
        let fit = fit_ols(&d, "y", &["x"]).unwrap();
        assert_eq!(
            partial_curve(&fit, &d, "z", 5).unwrap_err(),
            EstimationError::UnknownRegressor("z".into())
        );
        assert_eq!(
            partial_curve(&fit, &d, "x", 1).unwrap_err(),
            EstimationError::InvalidGrid(1)
        );
    }

    #[test]
    fn empty_forest() {
        assert!(forest_rows(&[], "x").unwrap().is_empty());
    }
}
