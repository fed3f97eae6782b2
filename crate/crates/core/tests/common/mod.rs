#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shishkin::problem::{PerturbationVector, ProblemSpec, TimePolynomial, ValidatedProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly increasing eps in `[lo, 1]`, log-uniform, neighbours at least
/// `min_ratio` apart.
pub fn random_eps(r: &mut ChaCha8Rng, n: usize, lo_exp: f64, min_ratio: f64) -> PerturbationVector {
    loop {
        let mut e: Vec<f64> = (0..n).map(|_| 10f64.powf(r.gen_range(lo_exp..0.0))).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if e.windows(2).all(|w| w[1] >= w[0] * min_ratio) {
            return PerturbationVector::new(e).unwrap();
        }
    }
}

fn poly(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    let deg = r.gen_range(0..=2);
    (0..=deg).map(|_| r.gen_range(lo..hi)).collect()
}

fn add(a: &mut Vec<f64>, b: &[f64]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0.0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Random problem satisfying the diagonal-dominance conditions exactly:
/// off-diagonals are `−p(t)` with `p ≥ 0` coefficientwise and each diagonal is
/// the sum of its row's `|off-diagonals|` plus a margin polynomial with
/// nonnegative coefficients, so the minimum row sum sits at `t = 0`.
/// `f` and `u0` are nonnegative.
pub fn random_problem(r: &mut ChaCha8Rng, n: usize) -> ValidatedProblem {
    let eps = random_eps(r, n, -8.0, 1.05);
    let mut a = vec![vec![TimePolynomial::constant(0.0); n]; n];
    let mut margin0 = f64::INFINITY;
    for i in 0..n {
        let mut diag = poly(r, 0.0, 1.0);
        diag[0] += r.gen_range(0.5..3.0);
        margin0 = margin0.min(diag[0]);
        for j in 0..n {
            if i != j {
                let off = poly(r, 0.0, 1.0);
                add(&mut diag, &off);
                a[i][j] = TimePolynomial::new(off.iter().map(|c| -c).collect());
            }
        }
        a[i][i] = TimePolynomial::new(diag);
    }
    let f = (0..n).map(|_| TimePolynomial::new(poly(r, 0.0, 2.0))).collect();
    let u0 = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
    let horizon = (2.02 * eps.largest() / margin0).max(r.gen_range(0.5..2.0));
    ProblemSpec::new(eps, a, f, u0, horizon).unwrap().validate(256).unwrap()
}

/// Constant-coefficient n = 2 problem with a layer per component.
pub fn two_by_two(eps: Vec<f64>) -> ValidatedProblem {
    ProblemSpec::constant(eps, &[vec![3.0, -1.0], vec![-1.0, 3.0]], &[2.0, 2.0], vec![0.0, 0.0], 1.0)
        .unwrap()
        .validate(1024)
        .unwrap()
}

/// Variable-coefficient n = 3 problem: diagonal `4 + t`, off-diagonals `−1`,
/// `f = (1 + t, t, 1 + t²)`, `u(0) = 0`.
pub fn three_by_three(eps: Vec<f64>) -> ValidatedProblem {
    let c = TimePolynomial::constant;
    let d = || TimePolynomial::new(vec![4.0, 1.0]);
    ProblemSpec::new(
        PerturbationVector::new(eps).unwrap(),
        vec![vec![d(), c(-1.0), c(-1.0)], vec![c(-1.0), d(), c(-1.0)], vec![c(-1.0), c(-1.0), d()]],
        vec![TimePolynomial::new(vec![1.0, 1.0]), TimePolynomial::new(vec![0.0, 1.0]), TimePolynomial::new(vec![1.0, 0.0, 1.0])],
        vec![0.0; 3],
        1.0,
    )
    .unwrap()
    .validate(1024)
    .unwrap()
}

/// `A = [[2,−1],[−1,2]]`, `f = 0`, `u(0) = (1, 1)`, `ε = (0.01, 0.1)`.
pub fn layer_problem() -> ValidatedProblem {
    ProblemSpec::constant(vec![0.01, 0.1], &[vec![2.0, -1.0], vec![-1.0, 2.0]], &[0.0, 0.0], vec![1.0, 1.0], 1.0)
        .unwrap()
        .validate(1024)
        .unwrap()
}
