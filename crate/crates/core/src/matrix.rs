//! Small dense linear algebra: row-major matrices, row-stochastic matrices,
//! Kronecker products, stationary distributions and power iteration.
//!
//! Everything here is sized for HMMs with a handful of states, so the
//! routines favour exactness and determinism over asymptotic speed.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Rows of a stochastic matrix may deviate from 1 by at most this much; they
/// are then rescaled silently.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Default entry cap for [`kronecker`].
pub const KRONECKER_CAP: usize = 1_000_000;

/// Relative pivot threshold below which the stationary system is considered
/// rank deficient.
const STATIONARY_RANK_TOL: f64 = 1e-8;

/// Dense row-major matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "shape {rows}x{cols} has an empty dimension"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "entry ({}, {}) is not finite",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::InvalidMatrix(format!(
                "row {bad} has {} entries, expected {n_cols}",
                rows[bad].len()
            )));
        }
        Matrix::new(n_rows, n_cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut data = vec![0.0; n * n];
        for (i, &x) in entries.iter().enumerate() {
            data[i * n + i] = x;
        }
        Matrix::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self[(i, j)];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `xᵀ A`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "vector length must equal row count");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    /// Matrix times column vector: `A x`.
    pub fn right_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with the default entry cap.
///
/// Row index of the result is `i * b.rows() + k` for row `i` of `a` and row
/// `k` of `b` (the first factor varies slowest); columns likewise.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    kronecker_with_cap(a, b, KRONECKER_CAP)
}

pub fn kronecker_with_cap(a: &Matrix, b: &Matrix, cap: usize) -> Result<Matrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let entries = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c));
    let (rows, cols, entries) = match (rows, cols, entries) {
        (Some(r), Some(c), Some(e)) if e <= cap => (r, c, e),
        (_, _, e) => {
            return Err(Error::KroneckerTooLarge {
                entries: e.unwrap_or(usize::MAX),
                cap,
            })
        }
    };
    let mut data = vec![0.0; entries];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for (d, &x) in data[base..base + b.cols].iter_mut().zip(b.row(k)) {
                    *d = s * x;
                }
            }
        }
    }
    Ok(Matrix { rows, cols, data })
}

/// Kronecker product of two vectors, first factor slowest.
pub fn kronecker_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Probability vector: nonnegative entries summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        if entries.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument(
                "probability vector has a negative or non-finite entry".into(),
            ));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NotStochastic {
                row: 0,
                sum,
                tol: ROW_SUM_TOL,
            });
        }
        Ok(ProbVector(entries.into_iter().map(|x| x / sum).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn kron(&self, other: &ProbVector) -> ProbVector {
        ProbVector(kronecker_vec(&self.0, &other.0))
    }
}

/// Row-stochastic matrix (not necessarily square: emission matrices qualify).
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix(Matrix);

impl StochasticMatrix {
    /// Accepts rows summing to 1 within [`ROW_SUM_TOL`] and rescales them.
    pub fn new(inner: Matrix) -> Result<Self> {
        StochasticMatrix::with_tolerance(inner, ROW_SUM_TOL)
    }

    /// Like [`StochasticMatrix::new`] with a caller-chosen row-sum tolerance,
    /// for matrices published with a fixed number of decimals.
    pub fn with_tolerance(inner: Matrix, tol: f64) -> Result<Self> {
        if !inner.is_nonnegative() {
            return Err(Error::InvalidMatrix(
                "stochastic matrix has a negative entry".into(),
            ));
        }
        let mut inner = inner;
        let cols = inner.cols;
        for (row, chunk) in inner.data.chunks_mut(cols).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::NotStochastic { row, sum, tol });
            }
            chunk.iter_mut().for_each(|x| *x /= sum);
        }
        Ok(StochasticMatrix(inner))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        StochasticMatrix::new(Matrix::from_rows(rows)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows
    }

    pub fn cols(&self) -> usize {
        self.0.cols
    }
}

impl Index<(usize, usize)> for StochasticMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Stationary distribution of a square stochastic matrix.
///
/// Solves `(Pᵀ − I) π = 0` with the last equation replaced by `Σ π = 1`,
/// using Gaussian elimination with partial pivoting. A pivot smaller than
/// `1e-8` (relative to the largest coefficient) means the null space is
/// more than one-dimensional.
pub fn stationary_distribution(p: &StochasticMatrix) -> Result<ProbVector> {
    let m = p.matrix();
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "transition matrix is {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    // Augmented system [A | b] stored row-major, width n + 1.
    let w = n + 1;
    let mut a = vec![0.0; n * w];
    for i in 0..n {
        for j in 0..n {
            a[i * w + j] = m[(j, i)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1) * w + j] = 1.0;
    }
    a[(n - 1) * w + n] = 1.0;

    let scale = a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))
            .unwrap();
        if a[pivot_row * w + col].abs() < STATIONARY_RANK_TOL * scale {
            return Err(Error::ReducibleChain);
        }
        if pivot_row != col {
            for j in 0..w {
                a.swap(col * w + j, pivot_row * w + j);
            }
        }
        let piv = a[col * w + col];
        for r in col + 1..n {
            let f = a[r * w + col] / piv;
            if f == 0.0 {
                continue;
            }
            for j in col..w {
                a[r * w + j] -= f * a[col * w + j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * w + j] * x[j]).sum();
        x[i] = (a[i * w + n] - s) / a[i * w + i];
    }
    // Rounding can leave entries at -1e-17 or so.
    for v in &mut x {
        if *v < 0.0 {
            if *v < -1e-10 {
                return Err(Error::ReducibleChain);
            }
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= sum);
    Ok(ProbVector(x))
}

/// Result of [`dominant_eigenvalue`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominantEigen {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITERS: usize = 10_000;

/// Perron root of a nonnegative square matrix by power iteration.
///
/// Starts from the all-ones vector, normalises by the max-norm each step and
/// reports the Rayleigh quotient together with `‖Wv − λv‖∞`. Convergence
/// speed is governed by the ratio of the two largest eigenvalue moduli.
pub fn dominant_eigenvalue(w: &Matrix, tol: f64, max_iters: usize) -> Result<DominantEigen> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "power iteration needs a square matrix, got {}x{}",
            w.rows, w.cols
        )));
    }
    if !w.is_nonnegative() {
        return Err(Error::InvalidMatrix(
            "power iteration expects a nonnegative matrix".into(),
        ));
    }
    let mut v = vec![1.0; w.rows];
    let mut estimate = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let wv = w.right_mul(&v);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        estimate = v.iter().zip(&wv).map(|(a, b)| a * b).sum::<f64>() / vv;
        residual = wv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - estimate * b).abs())
            .fold(0.0, f64::max);
        if residual < tol {
            return Ok(DominantEigen {
                value: estimate,
                residual,
                iterations: it,
            });
        }
        let norm = wv.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if norm == 0.0 {
            // Nilpotent direction: spectral radius zero.
            return Ok(DominantEigen {
                value: 0.0,
                residual: 0.0,
                iterations: it,
            });
        }
        v = wv.into_iter().map(|x| x / norm).collect();
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        estimate,
        residual,
    })
}
