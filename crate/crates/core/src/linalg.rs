//! Small dense linear algebra: just what the estimators and the moment
//! oracle need. Matrices are row-major `f64`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given slices.
    pub fn from_columns(columns: &[&[f64]]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged columns");
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn tmatvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        out
    }

    /// Principal submatrix on `idx` (rows and columns).
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR of a tall matrix, stored compactly.
#[derive(Debug, Clone)]
pub struct Qr {
    /// R in the upper triangle, Householder vectors below the diagonal.
    qr: Matrix,
    /// Scalar factors `2 / vᵀv` of the reflectors (0 for a skipped column).
    betas: Vec<f64>,
    /// Diagonal of R.
    rdiag: Vec<f64>,
}

impl Qr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "QR needs rows >= cols");
        let mut qr = a.clone();
        let mut betas = vec![0.0; n];
        let mut rdiag = vec![0.0; n];
        for k in 0..n {
            let norm = libm::sqrt((k..m).map(|i| qr[(i, k)] * qr[(i, k)]).sum::<f64>());
            if norm == 0.0 {
                continue;
            }
            let alpha = if qr[(k, k)] > 0.0 { -norm } else { norm };
            // v = x - alpha e1, stored in place; v_k kept separately via the column.
            qr[(k, k)] -= alpha;
            let vtv = (k..m).map(|i| qr[(i, k)] * qr[(i, k)]).sum::<f64>();
            let beta = 2.0 / vtv;
            for j in (k + 1)..n {
                let s = (k..m).map(|i| qr[(i, k)] * qr[(i, j)]).sum::<f64>() * beta;
                for i in k..m {
                    let v = qr[(i, k)];
                    qr[(i, j)] -= s * v;
                }
            }
            betas[k] = beta;
            rdiag[k] = alpha;
        }
        Self { qr, betas, rdiag }
    }

    /// `Qᵀ y`, full length.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        assert_eq!(y.len(), m, "shape mismatch");
        let mut out = y.to_vec();
        for k in 0..n {
            if self.betas[k] == 0.0 {
                continue;
            }
            let s = (k..m).map(|i| self.qr[(i, k)] * out[i]).sum::<f64>() * self.betas[k];
            for (i, o) in out.iter_mut().enumerate().skip(k) {
                *o -= s * self.qr[(i, k)];
            }
        }
        out
    }

    /// The n×n upper-triangular factor.
    pub fn r(&self) -> Matrix {
        let n = self.qr.cols();
        let mut r = Matrix::zeros(n, n);
        for i in 0..n {
            r[(i, i)] = self.rdiag[i];
            for j in (i + 1)..n {
                r[(i, j)] = self.qr[(i, j)];
            }
        }
        r
    }

    /// Least-squares solution of `A x ≈ y`. Assumes full column rank.
    pub fn solve_least_squares(&self, y: &[f64]) -> Vec<f64> {
        let n = self.qr.cols();
        let qty = self.qt_mul(y);
        back_substitute(&self.r(), &qty[..n])
    }
}

/// Solves `R x = b` for upper-triangular `R`.
pub fn back_substitute(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = r.cols();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (b[i] - s) / r[(i, i)];
    }
    x
}

/// Inverse of an upper-triangular matrix.
pub fn upper_triangular_inverse(r: &Matrix) -> Matrix {
    let n = r.cols();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = back_substitute(r, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv
}

/// Singular values by one-sided Jacobi, in decreasing order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    // Work on the narrow side.
    let mut w = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let (m, n) = (w.rows(), w.cols());
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if gamma == 0.0 || libm::fabs(gamma) <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| libm::sqrt((0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>()))
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest over largest singular value; 0 for an all-zero matrix.
pub fn inverse_condition(a: &Matrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, in decreasing order.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols(), "matrix must be square");
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let total: f64 = m.as_slice().iter().map(|v| v * v).sum();
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not positive.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = libm::sqrt(d);
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    x
}

pub fn cholesky_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv
}

/// Symmetric positive-definite solve with Jacobi (diagonal) equilibration.
/// Returns the solution and the inverse, or `None` if not positive definite.
pub fn spd_solve_and_inverse(a: &Matrix, b: &[f64]) -> Option<(Vec<f64>, Matrix)> {
    let n = a.rows();
    let mut d = vec![0.0; n];
    for i in 0..n {
        if !(a[(i, i)] > 0.0) {
            return None;
        }
        d[i] = 1.0 / libm::sqrt(a[(i, i)]);
    }
    let mut scaled = a.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= d[i] * d[j];
        }
    }
    let l = cholesky(&scaled)?;
    let rhs: Vec<f64> = b.iter().zip(&d).map(|(v, s)| v * s).collect();
    let x: Vec<f64> = cholesky_solve(&l, &rhs).iter().zip(&d).map(|(v, s)| v * s).collect();
    let mut inv = cholesky_inverse(&l);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] *= d[i] * d[j];
        }
    }
    Some((x, inv))
}
