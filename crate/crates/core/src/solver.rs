//! Backward Euler on a Shishkin mesh.
//!
//! The discrete operator is `L^N U(t_j) = E (U(t_j) − U(t_{j−1}))/δ_j + A(t_j) U(t_j)`,
//! so each step solves the `n × n` system
//!
//! ```text
//! (E/δ_j + A(t_j)) U(t_j) = rhs(t_j) + (E/δ_j) U(t_{j−1})
//! ```
//!
//! whose matrix is strictly diagonally dominant with nonpositive
//! off-diagonals. That M-matrix structure is what gives the discrete maximum
//! principle and the stability bound certified below.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::{MeshError, ShishkinMesh};
use crate::problem::ValidatedProblem;
use crate::smallmat::{inverse, norm_inf_vec, Lu, MatError, SquareMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("step {step}: {source}")]
    Step { step: usize, source: MatError },
    #[error("step {step}: residual {residual:e} exceeds {bound:e}")]
    Residual { step: usize, residual: f64, bound: f64 },
    #[error("initial value has length {got}, expected {expected}")]
    InitLength { expected: usize, got: usize },
    #[error("non-finite solution value")]
    NonFinite,
    #[error("grid needs {expected} values, got {got}")]
    GridShape { expected: usize, got: usize },
    #[error("A(0) is singular: {0}")]
    SingularA0(MatError),
}

/// Relative tolerances used by the solver and its certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Step solve residual, relative to `1 + ‖rhs‖`.
    pub step_residual: f64,
    /// Allowed negativity in the maximum principle, relative to the stability bound.
    pub max_principle: f64,
    /// Allowed excess over the stability bound, relative to the bound.
    pub stability: f64,
    /// Recomposition error `‖U − (V + W)‖`, relative to `1 + ‖U‖`.
    pub superposition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { step_residual: 1e-12, max_principle: 1e-12, stability: 1e-10, superposition: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Full,
    Smooth,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    GivenF,
    ZeroF,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MarchOptions {
    pub tolerances: Tolerances,
    /// Reuse step factorizations for repeated `δ_j`. Only takes effect when
    /// `A` has constant coefficients; results are bit-identical either way.
    pub cache_factorizations: bool,
}

/// Discrete solution `U_i(t_j)` on a shared mesh.
#[derive(Debug, Clone)]
pub struct SolutionGrid {
    mesh: Arc<ShishkinMesh>,
    n: usize,
    values: Vec<f64>,
    kind: GridKind,
    rhs_mode: RhsMode,
}

impl SolutionGrid {
    /// Wraps precomputed values laid out time-point by time-point
    /// (`values[j * n + i] = U_i(t_j)`).
    pub fn from_values(
        mesh: Arc<ShishkinMesh>,
        n: usize,
        values: Vec<f64>,
        kind: GridKind,
        rhs_mode: RhsMode,
    ) -> Result<Self, SolveError> {
        let expected = (mesh.intervals() + 1) * n;
        if values.len() != expected {
            return Err(SolveError::GridShape { expected, got: values.len() });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        Ok(Self { mesh, n, values, kind, rhs_mode })
    }

    pub fn mesh(&self) -> &Arc<ShishkinMesh> {
        &self.mesh
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn rhs_mode(&self) -> RhsMode {
        self.rhs_mode
    }

    pub fn intervals(&self) -> usize {
        self.mesh.intervals()
    }

    /// `U_i(t_j)`, 0-based component `i`.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    /// `U(t_j)` as a slice of length `n`.
    pub fn at(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(i).step_by(self.n).copied()
    }

    pub fn initial(&self) -> &[f64] {
        self.at(0)
    }

    pub fn max_norm(&self) -> f64 {
        norm_inf_vec(&self.values)
    }

    /// Pointwise sum; both grids must live on the same mesh object.
    pub fn sum(&self, other: &SolutionGrid) -> SolutionGrid {
        assert!(Arc::ptr_eq(&self.mesh, &other.mesh), "grids on different meshes");
        SolutionGrid {
            mesh: Arc::clone(&self.mesh),
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            kind: GridKind::Full,
            rhs_mode: self.rhs_mode,
        }
    }

    /// `max_{i,j} |self − other|` over a common mesh.
    pub fn max_diff(&self, other: &SolutionGrid) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }
}

/// Smooth and singular parts of a discrete solution.
#[derive(Debug, Clone)]
pub struct DecomposedSolution {
    pub smooth: SolutionGrid,
    pub singular: SolutionGrid,
}

impl DecomposedSolution {
    pub fn recompose(&self) -> SolutionGrid {
        self.smooth.sum(&self.singular)
    }
}

/// `M_j = E/δ_j + A(t_j)` for `1 ≤ j ≤ N`.
pub fn step_matrix(vp: &ValidatedProblem, mesh: &ShishkinMesh, j: usize) -> SquareMatrix {
    assert!((1..=mesh.intervals()).contains(&j), "step index {j} out of range");
    let delta = mesh.delta(j);
    let mut m = vp.spec().eval_a_unchecked(mesh.points()[j]);
    for (i, e) in vp.eps().as_slice().iter().enumerate() {
        m.set(i, i, m.get(i, i) + e / delta);
    }
    m
}

fn rhs_at(vp: &ValidatedProblem, mode: RhsMode, t: f64) -> Vec<f64> {
    match mode {
        RhsMode::GivenF => vp.spec().eval_f_unchecked(t),
        RhsMode::ZeroF => vec![0.0; vp.n()],
    }
}

pub fn march(
    vp: &ValidatedProblem,
    mesh: &Arc<ShishkinMesh>,
    u_init: &[f64],
    rhs_mode: RhsMode,
) -> Result<SolutionGrid, SolveError> {
    march_with(vp, mesh, u_init, rhs_mode, &MarchOptions::default())
}

pub fn march_with(
    vp: &ValidatedProblem,
    mesh: &Arc<ShishkinMesh>,
    u_init: &[f64],
    rhs_mode: RhsMode,
    opts: &MarchOptions,
) -> Result<SolutionGrid, SolveError> {
    let n = vp.n();
    if u_init.len() != n {
        return Err(SolveError::InitLength { expected: n, got: u_init.len() });
    }
    if u_init.iter().any(|x| !x.is_finite()) {
        return Err(SolveError::NonFinite);
    }
    let eps = vp.eps().as_slice();
    let big_n = mesh.intervals();
    let mut values = Vec::with_capacity((big_n + 1) * n);
    values.extend_from_slice(u_init);

    let caching = opts.cache_factorizations && vp.spec().has_constant_coefficients();
    let mut cache: HashMap<u64, Lu> = HashMap::new();

    for j in 1..=big_n {
        let delta = mesh.delta(j);
        let t = mesh.points()[j];
        let prev = &values[(j - 1) * n..j * n];
        let mut rhs = rhs_at(vp, rhs_mode, t);
        for i in 0..n {
            rhs[i] += eps[i] / delta * prev[i];
        }
        let m = step_matrix(vp, mesh, j);
        let x = if caching {
            let lu = match cache.entry(delta.to_bits()) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(m.lu().map_err(|source| SolveError::Step { step: j, source })?)
                }
            };
            lu.solve(&rhs)
        } else {
            m.lu().and_then(|lu| lu.solve(&rhs))
        }
        .map_err(|source| SolveError::Step { step: j, source })?;

        let residual = norm_inf_vec(&m.mul_vec(&x).iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
        let bound = opts.tolerances.step_residual * (1.0 + norm_inf_vec(&rhs));
        if !(residual <= bound) {
            return Err(SolveError::Residual { step: j, residual, bound });
        }
        values.extend_from_slice(&x);
    }
    Ok(SolutionGrid { mesh: Arc::clone(mesh), n, values, kind: GridKind::Full, rhs_mode })
}

/// Builds the Shishkin mesh with `intervals` intervals and marches from `u(0)`.
pub fn solve(vp: &ValidatedProblem, intervals: usize) -> Result<SolutionGrid, SolveError> {
    let mesh = Arc::new(ShishkinMesh::build(vp, intervals)?);
    march(vp, &mesh, vp.spec().u0(), RhsMode::GivenF)
}

/// `A(0)⁻¹ f(0)`, the initial value of the smooth component.
pub fn reduced_initial_value(vp: &ValidatedProblem) -> Result<Vec<f64>, SolveError> {
    let a0 = vp.spec().eval_a_unchecked(0.0);
    let inv = inverse(&a0).map_err(SolveError::SingularA0)?;
    Ok(inv.mul_vec(&vp.spec().eval_f_unchecked(0.0)))
}

/// Splits the discrete solution into a smooth part started from `A(0)⁻¹f(0)`
/// with the given forcing, and a singular part carrying the remaining initial
/// data with zero forcing.
pub fn decompose(vp: &ValidatedProblem, mesh: &Arc<ShishkinMesh>) -> Result<DecomposedSolution, SolveError> {
    let v0 = reduced_initial_value(vp)?;
    let w0: Vec<f64> = vp.spec().u0().iter().zip(&v0).map(|(u, v)| u - v).collect();
    let mut smooth = march(vp, mesh, &v0, RhsMode::GivenF)?;
    smooth.kind = GridKind::Smooth;
    let mut singular = march(vp, mesh, &w0, RhsMode::ZeroF)?;
    singular.kind = GridKind::Singular;
    Ok(DecomposedSolution { smooth, singular })
}

/// `L^N U(t_j)` for `j = 1..=N`; entry `j − 1` holds step `j`.
pub fn apply_operator(vp: &ValidatedProblem, grid: &SolutionGrid) -> Vec<Vec<f64>> {
    let mesh = grid.mesh();
    let eps = vp.eps().as_slice();
    (1..=mesh.intervals())
        .map(|j| {
            let delta = mesh.delta(j);
            let a = vp.spec().eval_a_unchecked(mesh.points()[j]);
            let cur = grid.at(j);
            let prev = grid.at(j - 1);
            let au = a.mul_vec(cur);
            (0..grid.n()).map(|i| eps[i] * (cur[i] - prev[i]) / delta + au[i]).collect()
        })
        .collect()
}

fn max_rhs_norm(vp: &ValidatedProblem, grid: &SolutionGrid) -> f64 {
    match grid.rhs_mode() {
        RhsMode::ZeroF => 0.0,
        RhsMode::GivenF => grid.mesh().points()[1..]
            .iter()
            .map(|&t| norm_inf_vec(&vp.spec().eval_f_unchecked(t)))
            .fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MaxPrinciple {
    /// Hypotheses met and every value is nonnegative within tolerance.
    Holds { min_value: f64 },
    /// Hypotheses met but some value is below tolerance.
    Violated { min_value: f64, component: usize, step: usize },
    /// Initial data or forcing has a negative entry; no claim is made.
    Vacuous,
}

impl MaxPrinciple {
    pub fn passed(&self) -> bool {
        !matches!(self, MaxPrinciple::Violated { .. })
    }
}

pub fn certify_max_principle(vp: &ValidatedProblem, grid: &SolutionGrid) -> MaxPrinciple {
    certify_max_principle_with(vp, grid, &Tolerances::default())
}

pub fn certify_max_principle_with(vp: &ValidatedProblem, grid: &SolutionGrid, tol: &Tolerances) -> MaxPrinciple {
    if grid.initial().iter().any(|&x| x < 0.0) {
        return MaxPrinciple::Vacuous;
    }
    if grid.rhs_mode() == RhsMode::GivenF
        && grid.mesh().points()[1..].iter().any(|&t| vp.spec().eval_f_unchecked(t).iter().any(|&x| x < 0.0))
    {
        return MaxPrinciple::Vacuous;
    }
    let scale = stability_bound(vp, grid).max(1.0);
    let floor = -tol.max_principle * scale;
    let mut min = (f64::INFINITY, 0, 0);
    for j in 0..=grid.intervals() {
        for (i, &v) in grid.at(j).iter().enumerate() {
            if v < min.0 {
                min = (v, i, j);
            }
        }
    }
    if min.0 >= floor {
        MaxPrinciple::Holds { min_value: min.0 }
    } else {
        MaxPrinciple::Violated { min_value: min.0, component: min.1, step: min.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub bound: f64,
    pub max_norm: f64,
    pub ok: bool,
}

fn stability_bound(vp: &ValidatedProblem, grid: &SolutionGrid) -> f64 {
    norm_inf_vec(grid.initial()).max(max_rhs_norm(vp, grid) / vp.alpha())
}

/// `‖U(t_j)‖ ≤ max{‖U(0)‖, ‖rhs‖/α}` over the whole grid.
pub fn certify_stability(vp: &ValidatedProblem, grid: &SolutionGrid) -> StabilityCertificate {
    certify_stability_with(vp, grid, &Tolerances::default())
}

pub fn certify_stability_with(vp: &ValidatedProblem, grid: &SolutionGrid, tol: &Tolerances) -> StabilityCertificate {
    let bound = stability_bound(vp, grid);
    let max_norm = grid.max_norm();
    StabilityCertificate { bound, max_norm, ok: max_norm <= bound + tol.stability * bound }
}
