//! Binary logistic regression by iteratively reweighted least squares.
//!
//! Each iteration is a Newton step on the Bernoulli log-likelihood,
//! `β ← β + (XᵀWX)⁻¹ Xᵀ(y − μ)` with `W = diag(μ(1 − μ))`, solved through a
//! diagonally equilibrated Cholesky factorisation. Steps that would raise the
//! deviance are halved, so the recorded deviance does not increase beyond
//! rounding.
//!
//! The iterations run on a centred and scaled copy of the design, so the score
//! tolerance means the same thing whatever the units of the regressors; the
//! coefficients and their covariance are mapped back afterwards.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{design, formula, EstimationError, RANK_TOLERANCE};
use crate::linalg::{self, Matrix, Qr};
use crate::sem::Dataset;
use crate::stats::{self, Z_95};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsOptions {
    pub max_iter: usize,
    /// Convergence threshold on the largest absolute score component,
    /// evaluated on the standardized design.
    pub tol: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-8,
        }
    }
}

/// Largest |coefficient × regressor sd| tolerated on a fit that failed to
/// converge before it is reported as separation.
const STANDARDIZED_COEF_LIMIT: f64 = 30.0;

/// Newton decrement, relative to the deviance, below which step halving is
/// skipped.
const FLAT_DECREMENT: f64 = 1e-12;

/// Per-observation deviance below which the classes are taken to be
/// perfectly separated.
const DEVIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogisticFit {
    pub outcome: String,
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Wald standard errors from the inverse information at the optimum.
    pub standard_errors: Vec<f64>,
    pub covariance: Matrix,
    pub odds_ratios: Vec<f64>,
    /// `exp(coef - 1.96 se)`.
    pub ci_low: Vec<f64>,
    /// `exp(coef + 1.96 se)`.
    pub ci_high: Vec<f64>,
    pub deviance: f64,
    pub loglik: f64,
    /// `deviance + 2p`.
    pub aic: f64,
    pub n: usize,
    pub p: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute score component at the optimum, on the standardized
    /// design the convergence test uses.
    pub max_abs_score: f64,
    /// Deviance after each accepted iterate, starting from the initial guess.
    /// Non-increasing, except that the final full Newton steps taken once the
    /// improvement is below resolution may move it by a few ulps.
    pub deviance_history: Vec<f64>,
}

impl LogisticFit {
    fn index(&self, term: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == term)
    }

    pub fn coef(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.coefficients[i])
    }

    pub fn se(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.standard_errors[i])
    }

    pub fn odds_ratio(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.odds_ratios[i])
    }

    pub fn ci(&self, term: &str) -> Option<(f64, f64)> {
        self.index(term).map(|i| (self.ci_low[i], self.ci_high[i]))
    }

    pub fn formula(&self) -> String {
        formula(&self.outcome, &self.terms)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood of binary `y` under coefficients `beta`.
pub(crate) fn log_likelihood(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    stats::compensated_sum((0..x.rows()).map(|i| {
        // log μ = -softplus(-η) and log(1 - μ) = -softplus(η), free of the
        // cancellation in y·η - softplus(η) when |η| is large.
        let eta = linalg::dot(x.row(i), beta);
        -(y[i] * softplus(-eta) + (1.0 - y[i]) * softplus(eta))
    }))
}

/// Score vector `Xᵀ(y − μ)`.
pub(crate) fn score(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let mu: Vec<f64> = (0..x.rows()).map(|i| sigmoid(linalg::dot(x.row(i), beta))).collect();
    (0..x.cols())
        .map(|j| stats::compensated_sum((0..x.rows()).map(|i| (y[i] - mu[i]) * x[(i, j)])))
        .collect()
}

fn information(x: &Matrix, beta: &[f64]) -> Matrix {
    let p = x.cols();
    let mut info = Matrix::zeros(p, p);
    for i in 0..x.rows() {
        let row = x.row(i);
        let mu = sigmoid(linalg::dot(row, beta));
        let w = mu * (1.0 - mu);
        for a in 0..p {
            let wa = w * row[a];
            for b in a..p {
                info[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(a, b)] = info[(b, a)];
        }
    }
    info
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Fits `P(outcome = 1) = logistic(1 + regressors)` by IRLS.
pub fn fit_logistic<S: AsRef<str>>(
    data: &Dataset,
    outcome: &str,
    regressors: &[S],
    options: IrlsOptions,
) -> Result<LogisticFit, EstimationError> {
    let d = design(data, outcome, regressors)?;
    if let Some(&bad) = d.y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(EstimationError::NotBinary {
            column: outcome.into(),
            value: bad,
        });
    }
    let (n, p) = (d.x.rows(), d.x.cols());
    let ones = d.y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(EstimationError::Separation(format!(
            "outcome {outcome} takes a single value"
        )));
    }
    let ratio = linalg::inverse_condition(&Qr::new(&d.x).r());
    if !(ratio >= RANK_TOLERANCE) {
        return Err(EstimationError::RankDeficient { ratio });
    }
    // Column j >= 1 of `z` is (x_j - mean_j) / sd_j; beta = A gamma maps back.
    let mut z = d.x.clone();
    let mut back = Matrix::identity(p);
    for j in 1..p {
        let col: Vec<f64> = (0..n).map(|i| d.x[(i, j)]).collect();
        let (mean, sd) = (stats::mean(&col), libm::sqrt(stats::variance(&col)));
        for i in 0..n {
            z[(i, j)] = (col[i] - mean) / sd;
        }
        back[(j, j)] = 1.0 / sd;
        back[(0, j)] = -mean / sd;
    }

    let ybar = ones as f64 / n as f64;
    let mut beta = alloc::vec![0.0; p];
    beta[0] = libm::log(ybar / (1.0 - ybar));
    let mut deviance = -2.0 * log_likelihood(&z, &d.y, &beta);
    let mut history = alloc::vec![deviance];
    let mut grad = score(&z, &d.y, &beta);
    let mut iterations = 0;
    let mut converged = max_abs(&grad) < options.tol;

    while !converged && iterations < options.max_iter {
        let info = information(&z, &beta);
        let (step, _) = linalg::spd_solve_and_inverse(&info, &grad)
            .ok_or_else(|| EstimationError::Separation(String::from("information matrix became singular")))?;
        // Once the predicted improvement is below what the deviance can
        // resolve, the quadratic model is exact and the full step is taken.
        let flat = linalg::dot(&grad, &step) <= FLAT_DECREMENT * (1.0 + deviance);
        let mut t = 1.0;
        let mut candidate;
        let mut candidate_dev;
        loop {
            candidate = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect::<Vec<_>>();
            candidate_dev = -2.0 * log_likelihood(&z, &d.y, &candidate);
            if flat || candidate_dev <= deviance || t < 1e-10 {
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !flat && candidate_dev > deviance {
            // No descent direction left at working precision.
            break;
        }
        beta = candidate;
        deviance = candidate_dev;
        history.push(deviance);
        grad = score(&z, &d.y, &beta);
        converged = max_abs(&grad) < options.tol;
        if deviance < DEVIANCE_FLOOR * n as f64 {
            return Err(EstimationError::Separation(String::from("deviance collapsed to zero")));
        }
    }

    if !converged {
        let worst = beta.iter().skip(1).map(|b| libm::fabs(*b)).fold(0.0, f64::max);
        if worst > STANDARDIZED_COEF_LIMIT {
            return Err(EstimationError::Separation(format!(
                "coefficients diverging (standardized magnitude {worst:.1})"
            )));
        }
    }

    let info = information(&z, &beta);
    let (_, standardized_cov) = linalg::spd_solve_and_inverse(&info, &alloc::vec![0.0; p])
        .ok_or_else(|| EstimationError::Separation(String::from("information matrix is singular at the optimum")))?;
    let max_abs_score = max_abs(&grad);
    let covariance = back.matmul(&standardized_cov).matmul(&back.transpose());
    let beta = back.matvec(&beta);
    let standard_errors: Vec<f64> = (0..p).map(|i| libm::sqrt(covariance[(i, i)])).collect();
    let odds_ratios = beta.iter().map(|b| libm::exp(*b)).collect();
    let ci_low = beta
        .iter()
        .zip(&standard_errors)
        .map(|(b, s)| libm::exp(b - Z_95 * s))
        .collect();
    let ci_high = beta
        .iter()
        .zip(&standard_errors)
        .map(|(b, s)| libm::exp(b + Z_95 * s))
        .collect();
    Ok(LogisticFit {
        outcome: outcome.into(),
        terms: d.terms,
        coefficients: beta,
        standard_errors,
        covariance,
        odds_ratios,
        ci_low,
        ci_high,
        deviance,
        loglik: -0.5 * deviance,
        aic: deviance + 2.0 * p as f64,
        n,
        p,
        converged,
        iterations,
        max_abs_score,
        deviance_history: history,
    })
}
