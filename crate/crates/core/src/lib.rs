//! Parameter-uniform solver for singularly perturbed linear IVP systems
//!
//! ```text
//! E u′(t) + A(t) u(t) = f(t),   t ∈ (0, T],   u(0) given,
//! E = diag(ε_1, …, ε_n),  0 < ε_1 < … < ε_n ≤ 1.
//! ```
//!
//! Each `ε_i` produces its own initial layer. The solver uses backward Euler
//! on a piecewise-uniform Shishkin mesh whose `n` transition points resolve
//! every layer, which gives a maximum-norm error of order `N⁻¹ ln N`
//! independently of the `ε_i`.
//!
//! * [`problem`]: problem definition, JSON format and validation of the
//!   diagonal-dominance conditions.
//! * [`mesh`]: transition points, mesh classes and interaction points.
//! * [`solver`]: the time march, the smooth/singular decomposition and the
//!   discrete maximum principle and stability certificates.
//! * [`analysis`]: layer functions, closed-form oracle, two-mesh differences
//!   and convergence sweeps.
//! * [`smallmat`]: the dense `n × n` kernels underneath.
//!
//! ```
//! use shishkin::problem::ProblemSpec;
//! use shishkin::solver::solve;
//!
//! let vp = ProblemSpec::constant(
//!     vec![1e-4, 1e-2],
//!     &[vec![3.0, -1.0], vec![-1.0, 3.0]],
//!     &[2.0, 2.0],
//!     vec![0.0, 0.0],
//!     1.0,
//! )?
//! .validate(1024)?;
//! assert_eq!(vp.alpha(), 2.0);
//!
//! let grid = solve(&vp, 256)?;
//! let end = grid.at(grid.intervals());
//! assert!((end[0] - 1.0).abs() < 1e-6);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The `book/` directory next to the workspace root walks through each of
//! these pieces; its code listings are compiled and run as doctests of this
//! crate.

pub mod analysis;
pub mod mesh;
pub mod output;
pub mod problem;
pub mod smallmat;
pub mod solver;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problem.md")]
    mod problem {}
    #[doc = include_str!("../../../book/src/mesh.md")]
    mod mesh {}
    #[doc = include_str!("../../../book/src/scheme.md")]
    mod scheme {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
