use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::{OptError, TOL};

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, OptError> {
        if data.len() != rows * cols {
            return Err(OptError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(OptError::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. An empty list yields a `0 x cols`
    /// matrix only through [`DenseMatrix::zeros`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, OptError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(OptError::Dimension("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Appends a row; the first push into a `0 x 0` matrix fixes the width.
    pub fn push_row(&mut self, row: &[f64]) {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// `self * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^T * y`
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, OptError> {
        if self.cols != other.rows {
            return Err(OptError::Dimension(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Infinity norm of the entries (max absolute value).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Solves `a * X = b` by LU factorization with partial pivoting.
pub fn solve_linear_system(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, OptError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(OptError::Dimension(format!(
            "coefficient matrix is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.rows() != n {
        return Err(OptError::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|r| (r, lu[(r, k)]))
            .fold((k, 0.0_f64), |best, (r, v)| {
                if v.abs() > best.1.abs() {
                    (r, v)
                } else {
                    best
                }
            });
        if pivot.abs() <= TOL.pivot {
            return Err(OptError::SingularMatrix { column: k, pivot });
        }
        if p != k {
            for c in 0..n {
                lu.data.swap(k * n + c, p * n + c);
            }
            for c in 0..m {
                x.data.swap(k * m + c, p * m + c);
            }
        }
        for r in k + 1..n {
            let factor = lu[(r, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[(r, k)] = 0.0;
            for c in k + 1..n {
                let v = lu[(k, c)];
                lu[(r, c)] -= factor * v;
            }
            for c in 0..m {
                let v = x[(k, c)];
                x[(r, c)] -= factor * v;
            }
        }
    }

    for k in (0..n).rev() {
        let pivot = lu[(k, k)];
        for c in 0..m {
            let mut s = x[(k, c)];
            for j in k + 1..n {
                s -= lu[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = s / pivot;
        }
    }
    Ok(x)
}
