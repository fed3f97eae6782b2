//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.
//!
//! `cargo test -p shishkin --test acceptance`

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use shishkin::analysis::{
    default_eps_grid, exact_constant_solution, layer_functions, singular_decay_constants, uniform_sweep, EpsConfig,
    Mode, SweepReport, DEFAULT_K_EXPONENTS, DEFAULT_TOP_EXPONENTS,
};
use shishkin::mesh::{interaction_points, interval_counts, ShishkinMesh};
use shishkin::problem::ValidatedProblem;
use shishkin::solver::{
    certify_max_principle, certify_stability, decompose, march, MaxPrinciple, RhsMode, SolutionGrid,
};

use common::{layer_problem, random_eps, random_problem, rng, three_by_three, two_by_two};

const SWEEP_NS: [usize; 5] = [128, 256, 512, 1024, 2048];
const UNIFORM_ORDER_FLOOR: f64 = 0.70;
const ROW_ORDER_BAND: (f64, f64) = (0.75, 1.15);
const C_FIT_SPREAD: f64 = 3.0;
const RUNTIME_BUDGET_S: f64 = 30.0;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn two_grid() -> Vec<EpsConfig> {
    default_eps_grid(2, &DEFAULT_TOP_EXPONENTS, &DEFAULT_K_EXPONENTS).unwrap()
}

fn three_grid() -> Vec<EpsConfig> {
    default_eps_grid(3, &DEFAULT_TOP_EXPONENTS, &DEFAULT_K_EXPONENTS).unwrap()
}

fn exact_sweep_single_threaded() -> (SweepReport, f64) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let template = two_by_two(vec![1e-4, 1e-2]);
    let start = Instant::now();
    let report = pool.install(|| uniform_sweep(&template, &two_grid(), &SWEEP_NS, Mode::ExactOracle)).unwrap();
    (report, start.elapsed().as_secs_f64())
}

fn c1_exact_convergence(sweep: &SweepReport, secs: f64) -> Outcome {
    let mut failures = Vec::new();
    for row in &sweep.uniform {
        if let Some(p) = row.p_uniform {
            if p < UNIFORM_ORDER_FLOOR {
                failures.push(format!("p_uniform({}) = {p:.4}", row.intervals));
            }
        }
    }
    let mut row_min = f64::INFINITY;
    let mut row_max = f64::NEG_INFINITY;
    for rep in &sweep.reports {
        for row in rep.rows.iter().filter(|r| r.intervals >= 256) {
            if let Some(p) = row.order {
                row_min = row_min.min(p);
                row_max = row_max.max(p);
                if !(ROW_ORDER_BAND.0..=ROW_ORDER_BAND.1).contains(&p) {
                    failures.push(format!("{} N={} p={p:.4}", rep.eps_label, row.intervals));
                }
            }
        }
    }
    if secs > RUNTIME_BUDGET_S {
        failures.push(format!("runtime {secs:.1}s > {RUNTIME_BUDGET_S}s"));
    }
    let min_uniform = sweep.min_uniform_order().unwrap_or(f64::NAN);
    outcome(
        failures.is_empty(),
        format!(
            "min p_uniform = {min_uniform:.4} (>= {UNIFORM_ORDER_FLOOR}), row p in [{row_min:.4}, {row_max:.4}] \
             (band {:?}), {secs:.2}s single-threaded{}",
            ROW_ORDER_BAND,
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join("; ")) }
        ),
    )
}

fn c2_constant_fit(sweep: &SweepReport) -> Outcome {
    let mut worst = (1.0_f64, String::new());
    for rep in &sweep.reports {
        let fits: Vec<f64> = rep.rows.iter().filter(|r| r.intervals >= 256).map(|r| r.c_fit).collect();
        let hi = fits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = fits.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = hi / lo;
        if !(spread <= worst.0) || spread.is_nan() {
            worst = (spread, rep.eps_label.clone());
        }
    }
    outcome(worst.0 <= C_FIT_SPREAD, format!("max C_fit spread {:.3} at {} (limit {C_FIT_SPREAD})", worst.0, worst.1))
}

fn c3_two_mesh_variable(sweep: &SweepReport) -> Outcome {
    let pairs: Vec<String> = sweep
        .uniform
        .iter()
        .filter_map(|r| r.p_uniform.map(|p| format!("{}:{p:.3}", r.intervals)))
        .collect();
    let bad: Vec<String> = sweep
        .uniform
        .iter()
        .filter_map(|r| r.p_uniform.filter(|&p| p < UNIFORM_ORDER_FLOOR).map(|p| format!("N={} p={p:.4} worst {}", r.intervals, r.worst)))
        .collect();
    outcome(
        bad.is_empty(),
        format!("p_uniform by N [{}] (floor {UNIFORM_ORDER_FLOOR}){}", pairs.join(", "), if bad.is_empty() {
            String::new()
        } else {
            format!("; below floor: {}", bad.join("; "))
        }),
    )
}

/// Every sweep configuration of both test problems at every sweep N.
fn suite_problems() -> Vec<ValidatedProblem> {
    let mut out: Vec<ValidatedProblem> = two_grid().into_iter().map(|c| two_by_two(c.eps.as_slice().to_vec())).collect();
    out.extend(three_grid().into_iter().map(|c| three_by_three(c.eps.as_slice().to_vec())));
    out.push(layer_problem());
    out
}

fn c4_c6_superposition_and_stability() -> (Outcome, Outcome) {
    use rayon::prelude::*;
    let problems = suite_problems();
    let results: Vec<(f64, bool, String)> = problems
        .par_iter()
        .flat_map_iter(|vp| SWEEP_NS.iter().map(move |&n| (vp, n)))
        .map(|(vp, n)| {
            let mesh = Arc::new(ShishkinMesh::build(vp, n).unwrap());
            let full = march(vp, &mesh, vp.spec().u0(), RhsMode::GivenF).unwrap();
            let parts = decompose(vp, &mesh).unwrap();
            let rel = parts.recompose().max_diff(&full) / (1.0 + full.max_norm());
            let stable = [&full, &parts.smooth, &parts.singular].iter().all(|g| certify_stability(vp, g).ok);
            (rel, stable, format!("eps={:?} N={n}", vp.eps().as_slice()))
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let unstable: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.2.as_str()).collect();
    (
        outcome(worst <= 1e-10, format!("max ||U-(V+W)||/(1+||U||) = {worst:.3e} over {} solves (limit 1e-10)", results.len())),
        outcome(
            unstable.is_empty(),
            format!("{} of {} solves x 3 grids certified{}", results.len() - unstable.len(), results.len(), if unstable.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", unstable.join("; "))
            }),
        ),
    )
}

fn c5_max_principle() -> Outcome {
    let mut r = rng(5);
    let mut vacuous = 0;
    let mut violated = Vec::new();
    for k in 0..200 {
        let n = r.gen_range(1..=4);
        let vp = random_problem(&mut r, n);
        let big_n = (1usize << n) * (1 << r.gen_range(1..=6));
        let mesh = Arc::new(ShishkinMesh::build(&vp, big_n).unwrap());
        let grid = march(&vp, &mesh, vp.spec().u0(), RhsMode::GivenF).unwrap();
        match certify_max_principle(&vp, &grid) {
            MaxPrinciple::Holds { .. } => {}
            MaxPrinciple::Vacuous => vacuous += 1,
            v @ MaxPrinciple::Violated { .. } => violated.push(format!("problem {k}: {v:?}")),
        }
    }
    outcome(
        violated.is_empty() && vacuous == 0,
        format!("200 random problems: {} violations, {vacuous} vacuous{}", violated.len(), violated.first().map(|s| format!(" ({s})")).unwrap_or_default()),
    )
}

fn c7_mesh_invariants() -> Outcome {
    let mut r = rng(7);
    let mut failures = Vec::new();
    for k in 0..1000 {
        let n = r.gen_range(1..=6);
        let eps = random_eps(&mut r, n, -10.0, 1.0001);
        let alpha = r.gen_range(0.05..5.0);
        let horizon = r.gen_range(0.1..10.0);
        let big_n = (1usize << n) << r.gen_range(0..=8);
        if interval_counts(n, big_n).iter().sum::<usize>() != big_n {
            failures.push(format!("draw {k}: count identity"));
        }
        let mesh = ShishkinMesh::for_parameters(&eps, alpha, horizon, big_n).unwrap();
        for v in mesh.invariant_violations(&eps, alpha) {
            failures.push(format!("draw {k}: {v}"));
        }
    }
    outcome(failures.is_empty(), format!("1000 draws, {} failures{}", failures.len(), failures.first().map(|s| format!(" ({s})")).unwrap_or_default()))
}

fn c8_interaction_points() -> Outcome {
    let mut r = rng(8);
    let mut failures = Vec::new();
    for k in 0..1000 {
        let n = r.gen_range(2..=6);
        let eps = random_eps(&mut r, n, -8.0, 2.0);
        let alpha = r.gen_range(0.05..5.0);
        let horizon = 2.0 / alpha * r.gen_range(1.0..3.0);
        let ip = interaction_points(&eps, alpha);
        for i in 0..n {
            for j in i + 1..n {
                let t = ip.get(i, j);
                if !(t > 0.0 && t <= horizon) {
                    failures.push(format!("draw {k}: t_{},{} = {t} outside (0, {horizon}]", i + 1, j + 1));
                }
                if i + 1 < j && !(t < ip.get(i + 1, j)) {
                    failures.push(format!("draw {k}: t_{},{} >= t_{},{}", i + 1, j + 1, i + 2, j + 1));
                }
                if j + 1 < n && !(t < ip.get(i, j + 1)) {
                    failures.push(format!("draw {k}: t_{},{} >= t_{},{}", i + 1, j + 1, i + 1, j + 2));
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("1000 draws, {} failures{}", failures.len(), failures.first().map(|s| format!(" ({s})")).unwrap_or_default()))
}

fn c9_layer_decay() -> Outcome {
    let vp = layer_problem();
    let mesh = Arc::new(ShishkinMesh::build(&vp, 64).unwrap());
    let parts = decompose(&vp, &mesh).unwrap();
    let bits_ok = mesh.bits() == [true, true];
    let c = singular_decay_constants(&parts.singular, vp.eps(), vp.alpha());
    let fit_ok = c.outside <= 10.0 * c.inside;
    let bn = |t: f64| *layer_functions(vp.eps(), vp.alpha(), t).last().unwrap();
    let bound_ok = mesh
        .points()
        .iter()
        .enumerate()
        .all(|(j, &t)| parts.singular.at(j).iter().all(|w| w.abs() <= c.overall() * bn(t) * (1.0 + 1e-12)));

    let mut tail_worst = 0.0_f64;
    let mut tail_bits_ok = true;
    for cfg in two_grid().into_iter().filter(|c| c.eps.largest() <= 2f64.powi(-10)) {
        let vp = two_by_two(cfg.eps.as_slice().to_vec());
        for &n in &SWEEP_NS {
            let mesh = Arc::new(ShishkinMesh::build(&vp, n).unwrap());
            tail_bits_ok &= mesh.bits() == [true, true];
            let parts = decompose(&vp, &mesh).unwrap();
            let end = parts.singular.at(n).iter().fold(0.0_f64, |m, w| m.max(w.abs()));
            tail_worst = tail_worst.max(end);
        }
    }
    outcome(
        bits_ok && fit_ok && bound_ok && tail_bits_ok && tail_worst <= 1e-6,
        format!(
            "b=(1,1): C inside sigma_n = {:.4}, C outside = {:.4} (ratio {:.3}, limit 10); max |W(T)| for eps_2 <= 2^-10 = {tail_worst:.2e} (limit 1e-6)",
            c.inside,
            c.outside,
            c.outside / c.inside
        ),
    )
}

/// `2·U^{2N} − U^{N}` on the coarse points of a Shishkin mesh and its bisection.
fn extrapolated_reference(vp: &ValidatedProblem, coarse_n: usize) -> (Arc<ShishkinMesh>, Vec<Vec<f64>>, SolutionGrid) {
    let coarse = Arc::new(ShishkinMesh::build(vp, coarse_n).unwrap());
    let fine = Arc::new(coarse.bisect());
    let uc = march(vp, &coarse, vp.spec().u0(), RhsMode::GivenF).unwrap();
    let uf = march(vp, &fine, vp.spec().u0(), RhsMode::GivenF).unwrap();
    let reference = (0..=coarse_n)
        .map(|j| uc.at(j).iter().zip(uf.at(2 * j)).map(|(c, f)| 2.0 * f - c).collect())
        .collect();
    (coarse, reference, uf)
}

fn c10_oracle_cross_validation() -> Outcome {
    let problems = [
        (
            "A=[[2,-1],[-1,2]] eps=(0.5,1) u0=(1,0) T=2",
            shishkin::problem::ProblemSpec::constant(vec![0.5, 1.0], &[vec![2.0, -1.0], vec![-1.0, 2.0]], &[0.0, 0.0], vec![1.0, 0.0], 2.0)
                .unwrap()
                .validate(1024)
                .unwrap(),
        ),
        ("A=[[3,-1],[-1,3]] f=(2,2) eps=(1e-4,1e-2)", two_by_two(vec![1e-4, 1e-2])),
    ];
    let mut worst = 0.0_f64;
    let mut plain = 0.0_f64;
    let mut lines = Vec::new();
    for (name, vp) in &problems {
        let (mesh, reference, fine) = extrapolated_reference(vp, 1 << 17);
        let a = vp.spec().eval_a(0.0).unwrap();
        let f = vp.spec().eval_f(0.0).unwrap();
        let mut e = 0.0_f64;
        let mut e_plain = 0.0_f64;
        for (j, &t) in mesh.points().iter().enumerate() {
            let u = exact_constant_solution(&a, &f, vp.spec().u0(), vp.eps(), t).unwrap();
            for i in 0..vp.n() {
                e = e.max((u[i] - reference[j][i]).abs());
                e_plain = e_plain.max((u[i] - fine.value(i, 2 * j)).abs());
            }
        }
        worst = worst.max(e);
        plain = plain.max(e_plain);
        lines.push(format!("{name}: {e:.2e}"));
    }
    outcome(
        worst <= 1e-6,
        format!(
            "oracle vs extrapolated N=2^17/2^18 reference: {} (limit 1e-6; plain N=2^18 differs by {plain:.2e})",
            lines.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let (exact, secs) = exact_sweep_single_threaded();
    results.push(("C1 exact-oracle parameter-uniform convergence", c1_exact_convergence(&exact, secs)));
    results.push(("C2 C_fit stability", c2_constant_fit(&exact)));

    let template = three_by_three(vec![1e-4, 1e-3, 1e-2]);
    let two_mesh = uniform_sweep(&template, &three_grid(), &SWEEP_NS, Mode::TwoMesh).unwrap();
    results.push(("C3 two-mesh convergence, variable-coefficient n=3", c3_two_mesh_variable(&two_mesh)));

    let (c4, c6) = c4_c6_superposition_and_stability();
    results.push(("C4 discrete superposition", c4));
    results.push(("C5 discrete maximum principle", c5_max_principle()));
    results.push(("C6 discrete stability", c6));
    results.push(("C7 mesh invariants", c7_mesh_invariants()));
    results.push(("C8 interaction-point ordering and range", c8_interaction_points()));
    results.push(("C9 singular-component layer decay", c9_layer_decay()));
    results.push(("C10 oracle cross-validation", c10_oracle_cross_validation()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
