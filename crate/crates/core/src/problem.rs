//! Problem definition for `E u′ + A(t) u = f(t)`, `u(0)` given, on `[0, T]`.
//!
//! Entries of `A` and `f` are polynomials in `t`. [`ProblemSpec::validate`]
//! checks the structural conditions the method relies on by sampling:
//!
//! * off-diagonal entries of `A(t)` are nonpositive,
//! * every row is strictly diagonally dominant,
//! * the smallest row sum `α` is positive,
//! * the horizon is long enough to contain every layer, `T ≥ 2 ε_n / α`.
//!
//! Sampling is uniform over `[0, T]` including both endpoints. A violation
//! strictly between two samples is not detected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smallmat::SquareMatrix;

pub const MAX_DEGREE: usize = 16;
pub const DEFAULT_SAMPLE_COUNT: usize = 1024;

/// Which structural condition failed; carried by [`ProblemError`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    OffDiagonalSign,
    RowDominance,
    PositiveAlpha,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("problem file: {0}")]
    Json(String),
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension { what: String, expected: usize, got: usize },
    #[error("system size n must be at least 1")]
    EmptySystem,
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
    #[error("polynomial {what} has degree {degree}, maximum is {MAX_DEGREE}")]
    DegreeTooHigh { what: String, degree: usize },
    #[error("eps[{index}] = {value} is outside (0, 1]")]
    EpsOutOfRange { index: usize, value: f64 },
    #[error("eps[{index}] = {value} coincides with eps[{prev}]; distinct parameters are required")]
    EpsCoincident { index: usize, prev: usize, value: f64 },
    #[error("eps must be strictly increasing: eps[{index}] = {value} < eps[{prev}] = {prev_value}")]
    EpsNotIncreasing { index: usize, prev: usize, value: f64, prev_value: f64 },
    #[error("horizon T = {0} must be positive and finite")]
    BadHorizon(f64),
    #[error("t = {t} is outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("sample_count must be at least 2, got {0}")]
    SampleCount(usize),
    #[error("(a1)-sign violated: a[{row}][{col}](t = {t}) = {value} > 0 (rows and columns 1-based)")]
    OffDiagonalSign { row: usize, col: usize, t: f64, value: f64 },
    #[error("(a1)-dominance violated in row {row} at t = {t}: a_ii = {diag} <= sum |a_ij| = {off}")]
    RowDominance { row: usize, t: f64, diag: f64, off: f64 },
    #[error("(a2)-alpha violated: row sum of row {row} at t = {t} is {row_sum} <= 0")]
    NonPositiveAlpha { row: usize, t: f64, row_sum: f64 },
    #[error("horizon condition violated: T = {horizon} < 2*eps_n/alpha = {required}")]
    Horizon { horizon: f64, required: f64 },
}

impl ProblemError {
    /// The structural condition this error reports, if it is one.
    pub fn condition(&self) -> Option<Condition> {
        match self {
            ProblemError::OffDiagonalSign { .. } => Some(Condition::OffDiagonalSign),
            ProblemError::RowDominance { .. } => Some(Condition::RowDominance),
            ProblemError::NonPositiveAlpha { .. } => Some(Condition::PositiveAlpha),
            ProblemError::Horizon { .. } => Some(Condition::Horizon),
            _ => None,
        }
    }
}

/// Strictly increasing perturbation parameters `0 < ε_1 < … < ε_n ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationVector(Vec<f64>);

impl PerturbationVector {
    pub fn new(eps: Vec<f64>) -> Result<Self, ProblemError> {
        if eps.is_empty() {
            return Err(ProblemError::EmptySystem);
        }
        for (i, &e) in eps.iter().enumerate() {
            if !e.is_finite() || e <= 0.0 || e > 1.0 {
                return Err(ProblemError::EpsOutOfRange { index: i + 1, value: e });
            }
            if i > 0 {
                let prev = eps[i - 1];
                if e == prev {
                    return Err(ProblemError::EpsCoincident { index: i + 1, prev: i, value: e });
                }
                if e < prev {
                    return Err(ProblemError::EpsNotIncreasing {
                        index: i + 1,
                        prev: i,
                        value: e,
                        prev_value: prev,
                    });
                }
            }
        }
        Ok(Self(eps))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn largest(&self) -> f64 {
        *self.0.last().expect("nonempty")
    }
}

impl std::ops::Index<usize> for PerturbationVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `c₀ + c₁ t + … + c_d t^d`. An empty coefficient list is the zero polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePolynomial {
    coeffs: Vec<f64>,
}

impl TimePolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Degree after dropping trailing zero coefficients (zero polynomial: 0).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    fn check(&self, what: impl Fn() -> String) -> Result<(), ProblemError> {
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ProblemError::NonFinite { what: what() });
        }
        if self.coeffs.len() > MAX_DEGREE + 1 {
            return Err(ProblemError::DegreeTooHigh { what: what(), degree: self.coeffs.len() - 1 });
        }
        Ok(())
    }
}

/// On-disk problem description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub eps: Vec<f64>,
    pub u0: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<TimePolynomial>>,
    pub f: Vec<TimePolynomial>,
}

/// A dimensionally consistent problem. Structural conditions on `A` are not
/// checked until [`ProblemSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    n: usize,
    a: Vec<Vec<TimePolynomial>>,
    f: Vec<TimePolynomial>,
    u0: Vec<f64>,
    horizon: f64,
    eps: PerturbationVector,
}

impl ProblemSpec {
    pub fn new(
        eps: PerturbationVector,
        a: Vec<Vec<TimePolynomial>>,
        f: Vec<TimePolynomial>,
        u0: Vec<f64>,
        horizon: f64,
    ) -> Result<Self, ProblemError> {
        let n = eps.len();
        let dim = |what: &str, got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(ProblemError::Dimension { what: what.to_string(), expected: n, got })
            }
        };
        dim("A", a.len())?;
        for (i, row) in a.iter().enumerate() {
            dim(&format!("A row {}", i + 1), row.len())?;
            for (j, p) in row.iter().enumerate() {
                p.check(|| format!("A[{}][{}]", i + 1, j + 1))?;
            }
        }
        dim("f", f.len())?;
        for (i, p) in f.iter().enumerate() {
            p.check(|| format!("f[{}]", i + 1))?;
        }
        dim("u0", u0.len())?;
        if u0.iter().any(|x| !x.is_finite()) {
            return Err(ProblemError::NonFinite { what: "u0".into() });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ProblemError::BadHorizon(horizon));
        }
        Ok(Self { n, a, f, u0, horizon, eps })
    }

    /// Constant-coefficient convenience constructor.
    pub fn constant(
        eps: Vec<f64>,
        a: &[Vec<f64>],
        f: &[f64],
        u0: Vec<f64>,
        horizon: f64,
    ) -> Result<Self, ProblemError> {
        let a = a
            .iter()
            .map(|r| r.iter().map(|&c| TimePolynomial::constant(c)).collect())
            .collect();
        let f = f.iter().map(|&c| TimePolynomial::constant(c)).collect();
        Self::new(PerturbationVector::new(eps)?, a, f, u0, horizon)
    }

    pub fn from_file(file: ProblemFile) -> Result<Self, ProblemError> {
        if file.eps.len() != file.n {
            return Err(ProblemError::Dimension { what: "eps".into(), expected: file.n, got: file.eps.len() });
        }
        Self::new(PerturbationVector::new(file.eps)?, file.a, file.f, file.u0, file.horizon)
    }

    pub fn from_json_str(s: &str) -> Result<Self, ProblemError> {
        let file: ProblemFile = serde_json::from_str(s).map_err(|e| ProblemError::Json(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            n: self.n,
            horizon: self.horizon,
            eps: self.eps.as_slice().to_vec(),
            u0: self.u0.clone(),
            a: self.a.clone(),
            f: self.f.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem file serializes")
    }

    /// Same problem with a different perturbation vector of the same length.
    pub fn with_eps(&self, eps: PerturbationVector) -> Result<Self, ProblemError> {
        Self::new(eps, self.a.clone(), self.f.clone(), self.u0.clone(), self.horizon)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eps(&self) -> &PerturbationVector {
        &self.eps
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn a_entry(&self, i: usize, j: usize) -> &TimePolynomial {
        &self.a[i][j]
    }

    pub fn f_entry(&self, i: usize) -> &TimePolynomial {
        &self.f[i]
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.a.iter().flatten().chain(&self.f).all(TimePolynomial::is_constant)
    }

    fn check_time(&self, t: f64) -> Result<(), ProblemError> {
        if (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(ProblemError::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    pub fn eval_a(&self, t: f64) -> Result<SquareMatrix, ProblemError> {
        self.check_time(t)?;
        Ok(self.eval_a_unchecked(t))
    }

    pub fn eval_f(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        self.check_time(t)?;
        Ok(self.eval_f_unchecked(t))
    }

    pub(crate) fn eval_a_unchecked(&self, t: f64) -> SquareMatrix {
        let data = self.a.iter().flatten().map(|p| p.eval(t)).collect();
        SquareMatrix::from_row_major(self.n, data).expect("finite polynomial values")
    }

    pub(crate) fn eval_f_unchecked(&self, t: f64) -> Vec<f64> {
        self.f.iter().map(|p| p.eval(t)).collect()
    }

    /// Checks (a1), (a2) and the horizon condition at `sample_count`
    /// uniformly spaced times and fixes `α` to the smallest sampled row sum.
    pub fn validate(self, sample_count: usize) -> Result<ValidatedProblem, ProblemError> {
        if sample_count < 2 {
            return Err(ProblemError::SampleCount(sample_count));
        }
        let n = self.n;
        let mut alpha = f64::INFINITY;
        for s in 0..sample_count {
            let t = if s == sample_count - 1 {
                self.horizon
            } else {
                self.horizon * s as f64 / (sample_count - 1) as f64
            };
            let a = self.eval_a_unchecked(t);
            for i in 0..n {
                let mut off = 0.0;
                let mut row_sum = 0.0;
                for j in 0..n {
                    let v = a.get(i, j);
                    row_sum += v;
                    if i != j {
                        if v > 0.0 {
                            return Err(ProblemError::OffDiagonalSign { row: i + 1, col: j + 1, t, value: v });
                        }
                        off += v.abs();
                    }
                }
                let diag = a.get(i, i);
                if diag <= off {
                    return Err(ProblemError::RowDominance { row: i + 1, t, diag, off });
                }
                if row_sum <= 0.0 {
                    return Err(ProblemError::NonPositiveAlpha { row: i + 1, t, row_sum });
                }
                alpha = alpha.min(row_sum);
            }
        }
        let required = 2.0 * self.eps.largest() / alpha;
        if self.horizon < required {
            return Err(ProblemError::Horizon { horizon: self.horizon, required });
        }
        Ok(ValidatedProblem { spec: self, alpha, sample_count })
    }
}

/// A problem that passed [`ProblemSpec::validate`], together with its `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem {
    spec: ProblemSpec,
    alpha: f64,
    sample_count: usize,
}

impl ValidatedProblem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn eps(&self) -> &PerturbationVector {
        &self.spec.eps
    }

    pub fn horizon(&self) -> f64 {
        self.spec.horizon
    }

    /// Revalidates with a new perturbation vector, keeping the sample count.
    pub fn with_eps(&self, eps: PerturbationVector) -> Result<ValidatedProblem, ProblemError> {
        self.spec.with_eps(eps)?.validate(self.sample_count)
    }
}
