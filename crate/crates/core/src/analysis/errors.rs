use crate::solver::SolutionGrid;

use super::{AnalysisError, ConstantOracle};

/// `E^N = max_{i,j} |U_i(t_j) − u_i(t_j)|` against the closed-form solution.
pub fn exact_error(grid: &SolutionGrid, oracle: &ConstantOracle) -> Result<f64, AnalysisError> {
    if grid.n() != oracle.dim() {
        return Err(AnalysisError::Dimension { grid: grid.n(), oracle: oracle.dim() });
    }
    let mut err = 0.0_f64;
    for (j, &t) in grid.mesh().points().iter().enumerate() {
        let u = oracle.eval(t);
        for (a, b) in grid.at(j).iter().zip(&u) {
            err = err.max((a - b).abs());
        }
    }
    Ok(err)
}

/// `D^N = max_{i,j} |U^N_i(t_j) − U^{2N}_i(t_j)|` over the coarse mesh points.
/// `fine` must live on the bisection of the coarse mesh.
pub fn two_mesh_difference(coarse: &SolutionGrid, fine: &SolutionGrid) -> Result<f64, AnalysisError> {
    coarse.mesh().check_nested_in(fine.mesh())?;
    if coarse.n() != fine.n() {
        return Err(AnalysisError::Dimension { grid: coarse.n(), oracle: fine.n() });
    }
    let mut d = 0.0_f64;
    for j in 0..=coarse.intervals() {
        for (a, b) in coarse.at(j).iter().zip(fine.at(2 * j)) {
            d = d.max((a - b).abs());
        }
    }
    Ok(d)
}
