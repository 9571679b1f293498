//! Replicated collider experiments.
//!
//! The data-generating template is the sodium/blood-pressure model from
//! [`crate::fixtures::sodium_spec`] with the sodium effect (`beta1`), the age
//! effect (`beta2`) and the two collider coefficients (`alpha1` on sodium,
//! `alpha2` on blood pressure) free. Each replicate fits
//!
//! * the correctly specified model `SBP ~ Sodium + Age`, and
//! * the collider model `SBP ~ Sodium + Age + Proteinuria`,
//!
//! and keeps the sodium coefficients. Replicate `r` draws its data under seed
//! [`derive_seed`]`(master, r)`, so results do not depend on which worker ran
//! which replicate, and aggregation always walks replicates in index order.

use alloc::vec::Vec;
use core::fmt;

use crate::estimators::{fit_ols, EstimationError};
use crate::fixtures::{self, AGE, PROTEINURIA, SBP, SODIUM};
use crate::rng::derive_seed;
use crate::sem::{CompiledSem, SemError};
use crate::stats::Z_95;

/// Sodium coefficient in the collider model when every error variance is 1:
/// `beta1 − alpha2 (alpha1 + alpha2 beta1) / (1 + alpha2²)`.
///
/// Conditioning on proteinuria leaves blood pressure with residual
/// `e − alpha2 (alpha2 e + u)/(1 + alpha2²)`, which shifts the sodium slope by
/// the amount proteinuria's sodium loading feeds back through that
/// projection. Independent of `beta2` and of the age and sodium equations.
pub fn analytic_collider_coef(beta1: f64, alpha1: f64, alpha2: f64) -> f64 {
    beta1 - alpha2 * (alpha1 + alpha2 * beta1) / (1.0 + alpha2 * alpha2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum McError {
    InvalidScenario(&'static str),
    /// A replicate's fit failed.
    Replicate {
        replicate: usize,
        source: EstimationError,
    },
    /// A sweep cell's fit failed.
    Cell {
        beta1: f64,
        alpha: f64,
        source: EstimationError,
    },
    Sem(SemError),
    /// No sign change of the collider coefficient on (0, 100].
    NoRoot {
        beta1: f64,
    },
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::InvalidScenario(why) => write!(f, "invalid scenario: {why}"),
            McError::Replicate { replicate, source } => write!(f, "replicate {replicate}: {source}"),
            McError::Cell { beta1, alpha, source } => {
                write!(f, "sweep cell (beta1={beta1}, alpha={alpha}): {source}")
            }
            McError::Sem(e) => write!(f, "{e}"),
            McError::NoRoot { beta1 } => {
                write!(
                    f,
                    "collider coefficient does not change sign on (0, 100] for beta1={beta1}"
                )
            }
        }
    }
}

impl core::error::Error for McError {}

impl From<SemError> for McError {
    fn from(e: SemError) -> Self {
        McError::Sem(e)
    }
}

impl McError {
    /// Underlying estimator error, if any.
    pub fn estimation(&self) -> Option<&EstimationError> {
        match self {
            McError::Replicate { source, .. } | McError::Cell { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub beta1: f64,
    pub beta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Observations per replicate.
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl Scenario {
    /// The reference setting: 1,000 replicates of 10,000 observations.
    pub fn reference() -> Self {
        Self {
            beta1: 1.05,
            beta2: 2.0,
            alpha1: 2.8,
            alpha2: 2.0,
            n: 10_000,
            replicates: 1_000,
            seed: 50_472,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.n < 10 {
            return Err(McError::InvalidScenario("n must be at least 10"));
        }
        if self.replicates < 1 {
            return Err(McError::InvalidScenario("at least one replicate is required"));
        }
        if ![self.beta1, self.beta2, self.alpha1, self.alpha2]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(McError::InvalidScenario("coefficients must be finite"));
        }
        Ok(())
    }

    pub fn sem(&self) -> CompiledSem {
        fixtures::sodium_with(self.beta1, self.beta2, self.alpha1, self.alpha2)
    }

    /// Runs replicate `r` against the compiled template.
    pub fn run_replicate(&self, sem: &CompiledSem, r: usize) -> Result<ReplicateOutcome, McError> {
        let data = sem.generate(self.n, derive_seed(self.seed, r as u64))?;
        let wrap = |source| McError::Replicate { replicate: r, source };
        let truth = fit_ols(&data, SBP, &[SODIUM, AGE]).map_err(wrap)?;
        let collider = fit_ols(&data, SBP, &[SODIUM, AGE, PROTEINURIA]).map_err(wrap)?;
        Ok(ReplicateOutcome {
            true_coef: truth.coef(SODIUM).expect("regressor present"),
            collider_coef: collider.coef(SODIUM).expect("regressor present"),
            collider_se: collider.se(SODIUM).expect("regressor present"),
        })
    }
}

/// Sodium coefficients from one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateOutcome {
    pub true_coef: f64,
    pub collider_coef: f64,
    pub collider_se: f64,
}

/// Aggregated Monte Carlo results.
///
/// Three bias readouts are kept side by side:
/// * `bias_box6` and `relbias_box6_pct` use the
///   `(true − |collider|)` convention, where `true` is each replicate's
///   correctly specified estimate;
/// * `bias_simple` is the conventional `mean(collider) − beta1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McSummary {
    pub beta1: f64,
    pub replicates: usize,
    pub n: usize,
    pub mean_true_model_coef: f64,
    pub mean_collider_model_coef: f64,
    pub mean_collider_se: f64,
    /// `mean collider coef − 1.96 × mean se` (not a Monte Carlo interval).
    pub ci_low: f64,
    pub ci_high: f64,
    pub bias_box6: f64,
    pub relbias_box6_pct: f64,
    pub bias_simple: f64,
    pub analytic_collider_coef: f64,
}

impl McSummary {
    /// Reduces replicate outcomes, which must be in replicate order.
    pub fn from_replicates(sc: &Scenario, outcomes: &[ReplicateOutcome]) -> Self {
        let r = outcomes.len() as f64;
        let mean = |f: &dyn Fn(&ReplicateOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / r;
        let mean_true = mean(&|o| o.true_coef);
        let mean_collider = mean(&|o| o.collider_coef);
        let mean_se = mean(&|o| o.collider_se);
        Self {
            beta1: sc.beta1,
            replicates: outcomes.len(),
            n: sc.n,
            mean_true_model_coef: mean_true,
            mean_collider_model_coef: mean_collider,
            mean_collider_se: mean_se,
            ci_low: mean_collider - Z_95 * mean_se,
            ci_high: mean_collider + Z_95 * mean_se,
            bias_box6: mean(&|o| o.true_coef - libm::fabs(o.collider_coef)),
            relbias_box6_pct: 100.0 * mean(&|o| (o.true_coef - libm::fabs(o.collider_coef)) / o.true_coef),
            bias_simple: mean_collider - sc.beta1,
            analytic_collider_coef: analytic_collider_coef(sc.beta1, sc.alpha1, sc.alpha2),
        }
    }
}

/// Runs every replicate sequentially.
pub fn run_mc(sc: &Scenario) -> Result<McSummary, McError> {
    sc.validate()?;
    let sem = sc.sem();
    let outcomes = (0..sc.replicates)
        .map(|r| sc.run_replicate(&sem, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(McSummary::from_replicates(sc, &outcomes))
}

/// One cell of the coefficient sweep (`alpha1 = alpha2 = alpha`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub beta1: f64,
    pub alpha: f64,
    pub estimated_coef: f64,
    /// Standard error of `estimated_coef` from the fit.
    pub se: f64,
    pub analytic_coef: f64,
    /// `beta1 − estimated_coef`.
    pub abs_bias_table3: f64,
}

/// Age effect used for every sweep cell.
pub const SWEEP_BETA2: f64 = 2.0;

/// Simulates and fits sweep cell `index` (row-major position in the grid).
pub fn sweep_cell(beta1: f64, alpha: f64, n: usize, seed: u64, index: usize) -> Result<SweepRow, McError> {
    let sem = fixtures::sodium_with(beta1, SWEEP_BETA2, alpha, alpha);
    let data = sem.generate(n, derive_seed(seed, index as u64))?;
    let fit =
        fit_ols(&data, SBP, &[SODIUM, AGE, PROTEINURIA]).map_err(|source| McError::Cell { beta1, alpha, source })?;
    let estimated_coef = fit.coef(SODIUM).expect("regressor present");
    Ok(SweepRow {
        beta1,
        alpha,
        estimated_coef,
        se: fit.se(SODIUM).expect("regressor present"),
        analytic_coef: analytic_collider_coef(beta1, alpha, alpha),
        abs_bias_table3: beta1 - estimated_coef,
    })
}

/// Grid cells in row-major order: `beta1` outer, `alpha` inner.
pub fn sweep_grid(beta1_values: &[f64], alpha_values: &[f64]) -> Result<Vec<(f64, f64)>, McError> {
    if beta1_values.is_empty() || alpha_values.is_empty() {
        return Err(McError::InvalidScenario("sweep lists must be non-empty"));
    }
    if !beta1_values.iter().chain(alpha_values).all(|v| v.is_finite()) {
        return Err(McError::InvalidScenario("sweep values must be finite"));
    }
    Ok(beta1_values
        .iter()
        .flat_map(|&b| alpha_values.iter().map(move |&a| (b, a)))
        .collect())
}

pub fn run_sweep(beta1_values: &[f64], alpha_values: &[f64], n: usize, seed: u64) -> Result<Vec<SweepRow>, McError> {
    if n < 10 {
        return Err(McError::InvalidScenario("n must be at least 10"));
    }
    sweep_grid(beta1_values, alpha_values)?
        .into_iter()
        .enumerate()
        .map(|(i, (b, a))| sweep_cell(b, a, n, seed, i))
        .collect()
}

/// Smallest `alpha = alpha1 = alpha2` at which the collider coefficient
/// reaches zero, by bisection on (0, 100].
pub fn sign_flip_boundary(beta1: f64) -> Result<f64, McError> {
    let f = |a: f64| analytic_collider_coef(beta1, a, a);
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    if !(f(lo) > 0.0 && f(hi) <= 0.0) {
        return Err(McError::NoRoot { beta1 });
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_examples() {
        assert!((analytic_collider_coef(1.05, 2.8, 2.0) - (-0.91)).abs() < 1e-12);
        assert!((analytic_collider_coef(1.0, 2.0, 2.0) - (-0.6)).abs() < 1e-12);
        for b in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(analytic_collider_coef(b, 0.0, 0.0), b);
        }
    }

    #[test]
    fn boundary_is_square_root_of_effect() {
        // beta1 (1 + a²) = a² (1 + beta1)  =>  a = sqrt(beta1)
        let a = sign_flip_boundary(1.0).unwrap();
        assert!((a - 1.0).abs() < 1e-9);
        assert!(analytic_collider_coef(1.0, a, a).abs() < 1e-8);
        let a = sign_flip_boundary(1.05).unwrap();
        assert!(a < 2.0);
        assert!(analytic_collider_coef(1.05, 2.0, 2.0) < 0.0);
    }

    #[test]
    fn boundary_errors() {
        assert!(matches!(sign_flip_boundary(0.0), Err(McError::NoRoot { .. })));
        assert!(matches!(sign_flip_boundary(-1.0), Err(McError::NoRoot { .. })));
        assert!(matches!(sign_flip_boundary(20_000.0), Err(McError::NoRoot { .. })));
    }

    #[test]
    fn scenario_validation() {
        let mut sc = Scenario::reference();
        sc.n = 9;
        assert!(sc.validate().is_err());
        sc.n = 10;
        sc.replicates = 0;
        assert!(sc.validate().is_err());
        sc.replicates = 1;
        sc.alpha1 = f64::NAN;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let g = sweep_grid(&[1.0, 2.0], &[0.5, 1.0, 1.5]).unwrap();
        assert_eq!(
            g,
            [(1.0, 0.5), (1.0, 1.0), (1.0, 1.5), (2.0, 0.5), (2.0, 1.0), (2.0, 1.5)]
        );
        assert!(sweep_grid(&[], &[1.0]).is_err());
    }

    #[test]
    fn summary_interval_brackets_mean() {
        let sc = Scenario {
            replicates: 5,
            n: 200,
            ..Scenario::reference()
        };
        let s = run_mc(&sc).unwrap();
        assert!(s.ci_low <= s.mean_collider_model_coef && s.mean_collider_model_coef <= s.ci_high);
        assert_eq!(s.replicates, 5);
    }
}
