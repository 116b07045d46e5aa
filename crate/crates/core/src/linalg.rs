//! Dense linear algebra for consequent identification.
//!
//! Only what the estimators need: a row-major [`Matrix`], a Householder-QR
//! least-squares solver and the recursive least-squares state.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default initial covariance scale for recursive least squares.
pub const DEFAULT_GAMMA: f64 = 1e6;

/// Relative threshold on the diagonal of R below which a system is treated as rank deficient.
const RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::invalid(format!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid("ragged rows"));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Largest |m_ij - m_ji| relative to the largest entry magnitude.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    /// Cholesky pivots of a symmetric matrix, or `None` once a pivot is not positive.
    pub fn cholesky_pivots(&self) -> Option<Vec<f64>> {
        let n = self.rows;
        let mut l = vec![0.0; n * n];
        let mut pivots = Vec::with_capacity(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            pivots.push(d);
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Some(pivots)
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

/// Least-squares solution of `a x ≈ y` by Householder QR.
///
/// Fails with [`Error::Singular`] when `a` is numerically rank deficient;
/// callers that need an answer anyway can fall back to [`RlsState`].
pub fn lse_batch(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    if n == 0 || m < n {
        return Err(Error::invalid(format!("need rows >= cols >= 1, got {m}x{n}")));
    }
    if y.len() != m {
        return Err(Error::invalid(format!("rhs length {} != {m}", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("rhs must be finite"));
    }

    // column-major working copy
    let mut q = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            q[j * m + i] = a[(i, j)];
        }
    }
    let mut rhs = y.to_vec();
    let mut diag = vec![0.0; n];

    for j in 0..n {
        let (done, rest) = q.split_at_mut((j + 1) * m);
        let col = &mut done[j * m..];
        let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[j] = 0.0;
            continue;
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        col[j] -= alpha;
        let vnorm2 = col[j..].iter().map(|v| v * v).sum::<f64>();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let v = &col[j..];
        for k in 0..n - j - 1 {
            let other = &mut rest[k * m + j..(k + 1) * m];
            let s = 2.0 * dot(v, other) / vnorm2;
            for (o, vi) in other.iter_mut().zip(v) {
                *o -= s * vi;
            }
        }
        let s = 2.0 * dot(v, &rhs[j..]) / vnorm2;
        for (r, vi) in rhs[j..].iter_mut().zip(v) {
            *r -= s * vi;
        }
    }

    let rmax = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if rmax == 0.0 || diag.iter().any(|d| d.abs() <= RANK_TOL * rmax) {
        return Err(Error::Singular(format!("rank-deficient {m}x{n} design")));
    }

    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let mut s = rhs[j];
        for k in j + 1..n {
            s -= q[k * m + j] * x[k];
        }
        x[j] = s / diag[j];
    }
    Ok(x)
}

/// Running state of the recursive least-squares estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlsState {
    estimate: Vec<f64>,
    covariance: Matrix,
    gamma: f64,
}

impl RlsState {
    /// Zero estimate with covariance `gamma · I`.
    pub fn new(dim: usize, gamma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("rls dimension must be >= 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        let mut covariance = Matrix::identity(dim);
        covariance.data.iter_mut().for_each(|v| *v *= gamma);
        Ok(RlsState {
            estimate: vec![0.0; dim],
            covariance,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.estimate.len()
    }

    pub fn estimate(&self) -> &[f64] {
        &self.estimate
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn into_estimate(self) -> Vec<f64> {
        self.estimate
    }

    /// Absorbs one observation `y ≈ a_row · x`.
    pub fn update(mut self, a_row: &[f64], y: f64) -> Result<Self> {
        self.update_in_place(a_row, y)?;
        Ok(self)
    }

    pub(crate) fn update_in_place(&mut self, a_row: &[f64], y: f64) -> Result<()> {
        let n = self.dim();
        if a_row.len() != n {
            return Err(Error::invalid(format!("row length {} != {n}", a_row.len())));
        }
        if !y.is_finite() || a_row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite observation"));
        }
        let s_a = self.covariance.mul_vec(a_row);
        let denom = 1.0 + dot(a_row, &s_a);
        let residual = y - dot(a_row, &self.estimate);
        for (x, sa) in self.estimate.iter_mut().zip(&s_a) {
            *x += sa / denom * residual;
        }
        // upper triangle, then mirror: keeps S exactly symmetric
        let cov = &mut self.covariance;
        for i in 0..n {
            for j in i..n {
                let v = cov[(i, j)] - s_a[i] * s_a[j] / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        Ok(())
    }
}

/// Feeds every row of `a` through a fresh [`RlsState`] and returns the final estimate.
pub fn rls_solve(a: &Matrix, y: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if y.len() != a.rows() {
        return Err(Error::invalid("rhs length mismatch"));
    }
    let mut state = RlsState::new(a.cols(), gamma)?;
    for (i, &yi) in y.iter().enumerate() {
        state.update_in_place(a.row(i), yi)?;
    }
    Ok(state.into_estimate())
}
