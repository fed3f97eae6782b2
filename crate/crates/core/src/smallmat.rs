//! Dense linear algebra for the small `n × n` systems that appear in every
//! implicit step: LU with partial pivoting, explicit inverse, and a check
//! that an inverse is entrywise nonnegative (the M-matrix property behind
//! the discrete maximum principle).

use std::fmt;

use thiserror::Error;

/// Pivots smaller than this multiple of the largest entry count as zero.
pub const SINGULAR_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatError {
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("expected {expected} entries for a {n}x{n} matrix, got {got}")]
    Shape { n: usize, expected: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision: zero pivot in column {col} (|pivot| = {pivot:e})")]
    Singular { col: usize, pivot: f64 },
    #[error("right-hand side has length {got}, expected {expected}")]
    RhsLength { expected: usize, got: usize },
}

/// Row-major square matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, MatError> {
        if n == 0 {
            return Err(MatError::Empty);
        }
        if data.len() != n * n {
            return Err(MatError::Shape { n, expected: n * n, got: data.len() });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(MatError::NonFinite { row: k / n, col: k % n });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(MatError::Shape { n, expected: n * n, got: n * r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(n, data)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity of dimension 0");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, MatError> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::from_row_major(n, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        SquareMatrix { n, data }
    }

    pub fn scale(&self, s: f64) -> SquareMatrix {
        SquareMatrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        SquareMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn lu(&self) -> Result<Lu, MatError> {
        Lu::factor(self)
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.n).map(|i| self.row(i)).collect();
        f.debug_struct("SquareMatrix").field("n", &self.n).field("rows", &rows).finish()
    }
}

/// Packed LU factors with the row permutation from partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &SquareMatrix) -> Result<Self, MatError> {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = SINGULAR_REL_TOL * m.max_abs();

        for col in 0..n {
            let (p, pmag) = (col..n)
                .map(|r| (r, lu[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag == 0.0 {
                return Err(MatError::Singular { col, pivot: pmag });
            }
            if p != col {
                for k in 0..n {
                    lu.swap(col * n + k, p * n + k);
                }
                perm.swap(col, p);
            }
            let pivot = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                if factor != 0.0 {
                    for k in col + 1..n {
                        lu[r * n + k] -= factor * lu[col * n + k];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, MatError> {
        let n = self.n;
        if rhs.len() != n {
            return Err(MatError::RhsLength { expected: n, got: rhs.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.lu[i * n + k] * x[k]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.lu[i * n + k] * x[k]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// Solves `m · x = rhs`.
pub fn lu_solve(m: &SquareMatrix, rhs: &[f64]) -> Result<Vec<f64>, MatError> {
    Lu::factor(m)?.solve(rhs)
}

pub fn inverse(m: &SquareMatrix) -> Result<SquareMatrix, MatError> {
    let lu = Lu::factor(m)?;
    let n = m.n;
    let mut data = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[col] = 1.0;
        let x = lu.solve(&e)?;
        for (row, v) in x.into_iter().enumerate() {
            data[row * n + col] = v;
        }
    }
    Ok(SquareMatrix { n, data })
}

/// True iff every entry of `m⁻¹` is at least `-tol`.
pub fn is_inverse_nonnegative(m: &SquareMatrix, tol: f64) -> Result<bool, MatError> {
    Ok(inverse(m)?.data.iter().all(|&x| x >= -tol))
}

pub fn norm_inf_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
