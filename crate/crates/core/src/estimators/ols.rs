use alloc::string::String;
use alloc::vec::Vec;

use super::{design, formula, EstimationError, RANK_TOLERANCE};
use crate::linalg::{self, Matrix, Qr};
use crate::sem::Dataset;

/// Ordinary least squares fit. Term 0 is the intercept.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OlsFit {
    pub outcome: String,
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// `σ̂² (XᵀX)⁻¹`.
    pub covariance: Matrix,
    pub rss: f64,
    pub n: usize,
    /// Coefficient count including the intercept.
    pub p: usize,
    /// Gaussian log-likelihood at the MLE variance `rss / n`.
    pub loglik: f64,
    /// `-2 loglik + 2 (p + 1)`; the error variance counts as a parameter.
    pub aic: f64,
}

impl OlsFit {
    fn index(&self, term: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == term)
    }

    pub fn coef(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.coefficients[i])
    }

    pub fn se(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.standard_errors[i])
    }

    /// Regressor names without the intercept.
    pub fn regressors(&self) -> &[String] {
        &self.terms[1..]
    }

    pub fn formula(&self) -> String {
        formula(&self.outcome, &self.terms)
    }

    /// Unbiased residual variance `rss / (n - p)`.
    pub fn sigma2(&self) -> f64 {
        self.rss / (self.n - self.p) as f64
    }
}

/// Fits `outcome ~ 1 + regressors` by Householder QR.
pub fn fit_ols<S: AsRef<str>>(data: &Dataset, outcome: &str, regressors: &[S]) -> Result<OlsFit, EstimationError> {
    let d = design(data, outcome, regressors)?;
    let (n, p) = (d.x.rows(), d.x.cols());
    let qr = Qr::new(&d.x);
    let r = qr.r();
    let ratio = linalg::inverse_condition(&r);
    if !(ratio >= RANK_TOLERANCE) {
        return Err(EstimationError::RankDeficient { ratio });
    }
    let coefficients = qr.solve_least_squares(&d.y);
    let fitted = d.x.matvec(&coefficients);
    let rss: f64 = d.y.iter().zip(&fitted).map(|(y, f)| (y - f) * (y - f)).sum();
    let yty: f64 = d.y.iter().map(|y| y * y).sum();
    if rss <= 1e-20 * yty {
        return Err(EstimationError::PerfectFit);
    }
    let sigma2 = rss / (n - p) as f64;
    let rinv = linalg::upper_triangular_inverse(&r);
    let mut covariance = rinv.matmul(&rinv.transpose());
    covariance.scale(sigma2);
    let standard_errors = (0..p).map(|i| libm::sqrt(covariance[(i, i)])).collect();
    let nf = n as f64;
    let loglik = -0.5 * nf * (libm::log(2.0 * core::f64::consts::PI) + libm::log(rss / nf) + 1.0);
    let aic = -2.0 * loglik + 2.0 * (p as f64 + 1.0);
    Ok(OlsFit {
        outcome: outcome.into(),
        terms: d.terms,
        coefficients,
        standard_errors,
        covariance,
        rss,
        n,
        p,
        loglik,
        aic,
    })
}
