//! Prints the exact-oracle and two-mesh sweeps used by the acceptance suite.
//!
//! `cargo run --release -p shishkin --example sweep_report`

use shishkin::analysis::{default_eps_grid, uniform_sweep, Mode, DEFAULT_K_EXPONENTS, DEFAULT_TOP_EXPONENTS};
use shishkin::problem::{PerturbationVector, ProblemSpec, TimePolynomial};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns = [128, 256, 512, 1024, 2048];

    let two = ProblemSpec::constant(vec![1e-4, 1e-2], &[vec![3.0, -1.0], vec![-1.0, 3.0]], &[2.0, 2.0], vec![0.0, 0.0], 1.0)?
        .validate(1024)?;
    let grid = default_eps_grid(2, &DEFAULT_TOP_EXPONENTS, &DEFAULT_K_EXPONENTS)?;
    let t0 = std::time::Instant::now();
    let sweep = uniform_sweep(&two, &grid, &ns, Mode::ExactOracle)?;
    print!("{}", sweep.to_csv());
    eprintln!("exact sweep: {:?}", t0.elapsed());

    let c = TimePolynomial::constant;
    let diag = || TimePolynomial::new(vec![4.0, 1.0]);
    let three = ProblemSpec::new(
        PerturbationVector::new(vec![1e-4, 1e-3, 1e-2])?,
        vec![
            vec![diag(), c(-1.0), c(-1.0)],
            vec![c(-1.0), diag(), c(-1.0)],
            vec![c(-1.0), c(-1.0), diag()],
        ],
        vec![TimePolynomial::new(vec![1.0, 1.0]), TimePolynomial::new(vec![0.0, 1.0]), TimePolynomial::new(vec![1.0, 0.0, 1.0])],
        vec![0.0, 1.0, -1.0],
        1.0,
    )?
    .validate(1024)?;
    let grid = default_eps_grid(3, &DEFAULT_TOP_EXPONENTS, &DEFAULT_K_EXPONENTS)?;
    let t0 = std::time::Instant::now();
    let sweep = uniform_sweep(&three, &grid, &ns, Mode::TwoMesh)?;
    print!("{}", sweep.to_csv());
    eprintln!("two-mesh sweep: {:?}", t0.elapsed());
    Ok(())
}
