//! Numerical checks of the method: layer functions, a closed-form oracle for
//! constant coefficients, error measurement and convergence studies.

mod convergence;
mod errors;
mod layers;
mod oracle;

use thiserror::Error;

use crate::mesh::MeshError;
use crate::problem::ProblemError;
use crate::smallmat::MatError;
use crate::solver::SolveError;

pub use convergence::{
    aggregate_uniform, convergence_study, default_eps_grid, orders, uniform_sweep, ConvergenceReport,
    ConvergenceRow, EpsConfig, Mode, SweepReport, UniformRow, DEFAULT_K_EXPONENTS, DEFAULT_TOP_EXPONENTS,
};
pub use errors::{exact_error, two_mesh_difference};
pub use layers::{layer_functions, singular_decay_constants, DecayConstants};
pub use oracle::{exact_constant_solution, expm, ConstantOracle};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("exact oracle needs constant A and f; use two_mesh mode for this problem")]
    OracleInapplicable,
    #[error("oracle: {0}")]
    Oracle(#[from] MatError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("N list must be nonempty and strictly doubling: {0:?}")]
    NotDoubling(Vec<usize>),
    #[error("grid has {grid} components but oracle has {oracle}")]
    Dimension { grid: usize, oracle: usize },
    #[error("eps grid is empty")]
    EmptyGrid,
}
