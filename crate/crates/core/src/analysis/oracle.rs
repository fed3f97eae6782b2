//! Closed-form solution for constant `A` and `f`:
//!
//! ```text
//! u(t) = A⁻¹f + exp(−t E⁻¹A) (u(0) − A⁻¹f)
//! ```
//!
//! The matrix exponential uses scaling and squaring around a truncated
//! Taylor series.

use crate::problem::{PerturbationVector, ValidatedProblem};
use crate::smallmat::{lu_solve, MatError, SquareMatrix};

use super::AnalysisError;

const TAYLOR_DEGREE: usize = 16;

/// `exp(m)`: scale by `2^{-s}` until `‖m‖_∞ ≤ 1/2`, sum the degree-16 series,
/// then square `s` times.
pub fn expm(m: &SquareMatrix) -> SquareMatrix {
    let norm = m.norm_inf();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
        while norm * 0.5f64.powi(squarings as i32) > 0.5 {
            squarings += 1;
        }
    }
    let scaled = m.scale(0.5f64.powi(squarings as i32));
    let n = m.dim();

    // Horner form of Σ X^k/k!: I + X/1 (I + X/2 (I + … (I + X/16))).
    let id = SquareMatrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = id.add(&scaled.matmul(&acc).scale(1.0 / k as f64));
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc);
    }
    acc
}

/// Exact solution of `E u′ + A u = f` with constant `A`, `f`.
#[derive(Debug, Clone)]
pub struct ConstantOracle {
    /// `E⁻¹A`
    scaled_a: SquareMatrix,
    steady: Vec<f64>,
    offset: Vec<f64>,
}

impl ConstantOracle {
    pub fn new(a: &SquareMatrix, f: &[f64], u0: &[f64], eps: &PerturbationVector) -> Result<Self, MatError> {
        let n = a.dim();
        assert_eq!(eps.len(), n);
        let steady = lu_solve(a, f)?;
        let offset = u0.iter().zip(&steady).map(|(u, s)| u - s).collect();
        let mut scaled_a = a.clone();
        for i in 0..n {
            for j in 0..n {
                scaled_a.set(i, j, a.get(i, j) / eps[i]);
            }
        }
        Ok(Self { scaled_a, steady, offset })
    }

    pub fn from_problem(vp: &ValidatedProblem) -> Result<Self, AnalysisError> {
        let spec = vp.spec();
        if !spec.has_constant_coefficients() {
            return Err(AnalysisError::OracleInapplicable);
        }
        let a = spec.eval_a_unchecked(0.0);
        let f = spec.eval_f_unchecked(0.0);
        Ok(Self::new(&a, &f, spec.u0(), vp.eps())?)
    }

    pub fn dim(&self) -> usize {
        self.steady.len()
    }

    pub fn steady_state(&self) -> &[f64] {
        &self.steady
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        if t == 0.0 || self.offset.iter().all(|&x| x == 0.0) {
            return self.steady.iter().zip(&self.offset).map(|(s, o)| s + o).collect();
        }
        let decay = expm(&self.scaled_a.scale(-t)).mul_vec(&self.offset);
        self.steady.iter().zip(decay).map(|(s, d)| s + d).collect()
    }
}

pub fn exact_constant_solution(
    a: &SquareMatrix,
    f_const: &[f64],
    u0: &[f64],
    eps: &PerturbationVector,
    t: f64,
) -> Result<Vec<f64>, MatError> {
    Ok(ConstantOracle::new(a, f_const, u0, eps)?.eval(t))
}
