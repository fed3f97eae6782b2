use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::mesh::ShishkinMesh;
use crate::output::fmt_num;
use crate::problem::{PerturbationVector, ValidatedProblem};
use crate::solver::{march, RhsMode};

use super::{exact_error, two_mesh_difference, AnalysisError, ConstantOracle};

/// `ε_n = 2^{-e}` for these `e`.
pub const DEFAULT_TOP_EXPONENTS: [u32; 7] = [0, 3, 6, 9, 12, 15, 18];
/// `ε_i = ε_{i+1} · 2^{-k}` for these `k`.
pub const DEFAULT_K_EXPONENTS: [u32; 3] = [2, 6, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Compare against the closed-form solution (constant coefficients only).
    ExactOracle,
    /// Compare each solve against the solve on its bisected mesh.
    TwoMesh,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ExactOracle => "exact_oracle",
            Mode::TwoMesh => "two_mesh",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub intervals: usize,
    /// `E^N` in exact mode, `D^N` in two-mesh mode.
    pub error: f64,
    /// `log₂(error(N)/error(2N))`; absent on the last row or when undefined.
    pub order: Option<f64>,
    /// `error · N / ln N`.
    pub c_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub eps_label: String,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsConfig {
    pub label: String,
    #[serde(serialize_with = "ser_eps")]
    pub eps: PerturbationVector,
}

fn ser_eps<S: serde::Serializer>(eps: &PerturbationVector, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(eps.as_slice())
}

impl EpsConfig {
    pub fn new(eps: PerturbationVector) -> Self {
        Self { label: eps_label(&eps), eps }
    }
}

/// `eps=1e-4;1e-2` style label, free of commas.
pub fn eps_label(eps: &PerturbationVector) -> String {
    let parts: Vec<String> = eps.as_slice().iter().map(|e| format!("{e:e}")).collect();
    format!("eps={}", parts.join(";"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformRow {
    #[serde(rename = "N")]
    pub intervals: usize,
    pub d_uniform: f64,
    pub p_uniform: Option<f64>,
    /// Label of the configuration attaining `d_uniform`.
    pub worst: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub mode: Mode,
    pub reports: Vec<ConvergenceReport>,
    pub uniform: Vec<UniformRow>,
}

/// `log₂(e_k / e_{k+1})` for consecutive entries; `None` for the last entry
/// and wherever the ratio is not a positive finite number.
pub fn orders(errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|k| {
            let (a, b) = (errors[k], *errors.get(k + 1)?);
            let r = a / b;
            (a > 0.0 && b > 0.0 && r.is_finite()).then(|| r.log2())
        })
        .collect()
}

fn c_fit(error: f64, intervals: usize) -> f64 {
    let n = intervals as f64;
    error * n / n.ln()
}

fn check_doubling(n_list: &[usize]) -> Result<(), AnalysisError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] != 2 * w[0]) || n_list[0] < 2 {
        return Err(AnalysisError::NotDoubling(n_list.to_vec()));
    }
    Ok(())
}

fn measure(vp: &ValidatedProblem, intervals: usize, mode: Mode, oracle: Option<&ConstantOracle>) -> Result<f64, AnalysisError> {
    let mesh = Arc::new(ShishkinMesh::build(vp, intervals)?);
    let coarse = march(vp, &mesh, vp.spec().u0(), RhsMode::GivenF)?;
    match mode {
        Mode::ExactOracle => exact_error(&coarse, oracle.expect("oracle present in exact mode")),
        Mode::TwoMesh => {
            let fine_mesh = Arc::new(mesh.bisect());
            let fine = march(vp, &fine_mesh, vp.spec().u0(), RhsMode::GivenF)?;
            two_mesh_difference(&coarse, &fine)
        }
    }
}

/// Errors and orders for each `N` in a doubling list. Two-mesh mode compares
/// the solve on the Shishkin mesh with `N` intervals against the solve on its
/// bisection (same transition points, `2N` intervals).
pub fn convergence_study(vp: &ValidatedProblem, n_list: &[usize], mode: Mode) -> Result<ConvergenceReport, AnalysisError> {
    check_doubling(n_list)?;
    let oracle = match mode {
        Mode::ExactOracle => Some(ConstantOracle::from_problem(vp)?),
        Mode::TwoMesh => None,
    };
    let errors: Vec<f64> = n_list
        .par_iter()
        .map(|&n| measure(vp, n, mode, oracle.as_ref()))
        .collect::<Result<_, _>>()?;
    let ps = orders(&errors);
    let rows = n_list
        .iter()
        .zip(&errors)
        .zip(ps)
        .map(|((&intervals, &error), order)| ConvergenceRow { intervals, error, order, c_fit: c_fit(error, intervals) })
        .collect();
    Ok(ConvergenceReport { mode, eps_label: eps_label(vp.eps()), rows })
}

/// The sweep grid over `ε_n = 2^{-e}` (`e ∈ top_exponents`) with geometric
/// ratio `2^{-k}` between neighbours (`k ∈ k_exponents`); `k` varies slowest.
pub fn default_eps_grid(n: usize, top_exponents: &[u32], k_exponents: &[u32]) -> Result<Vec<EpsConfig>, AnalysisError> {
    let mut out = Vec::new();
    for &k in k_exponents {
        for &e in top_exponents {
            let mut eps = vec![0.0; n];
            let mut exps = vec![0i32; n];
            exps[n - 1] = -(e as i32);
            for i in (0..n.saturating_sub(1)).rev() {
                exps[i] = exps[i + 1] - k as i32;
            }
            for i in 0..n {
                eps[i] = 2f64.powi(exps[i]);
            }
            let pv = PerturbationVector::new(eps)?;
            let label = format!("eps_n=2^-{e};k={k}");
            out.push(EpsConfig { label, eps: pv });
        }
    }
    Ok(out)
}

/// `D_uniform(N) = max` over the reports of the row for `N`.
pub fn aggregate_uniform(reports: &[ConvergenceReport]) -> Vec<UniformRow> {
    let Some(first) = reports.first() else { return Vec::new() };
    let mut rows: Vec<UniformRow> = first
        .rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let (d, worst) = reports
                .iter()
                .map(|rep| (rep.rows[k].error, &rep.eps_label))
                .fold((f64::NEG_INFINITY, &first.eps_label), |acc, cur| if cur.0 > acc.0 { cur } else { acc });
            UniformRow { intervals: r.intervals, d_uniform: d, p_uniform: None, worst: worst.clone() }
        })
        .collect();
    let ps = orders(&rows.iter().map(|r| r.d_uniform).collect::<Vec<_>>());
    for (r, p) in rows.iter_mut().zip(ps) {
        r.p_uniform = p;
    }
    rows
}

/// Runs [`convergence_study`] for every configuration (in parallel) and
/// aggregates the maximum over the grid. Output order follows `grid`.
pub fn uniform_sweep(
    template: &ValidatedProblem,
    grid: &[EpsConfig],
    n_list: &[usize],
    mode: Mode,
) -> Result<SweepReport, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    check_doubling(n_list)?;
    let reports: Vec<ConvergenceReport> = grid
        .par_iter()
        .map(|cfg| {
            let vp = template.with_eps(cfg.eps.clone())?;
            let mut rep = convergence_study(&vp, n_list, mode)?;
            rep.eps_label = cfg.label.clone();
            Ok(rep)
        })
        .collect::<Result<_, AnalysisError>>()?;
    let uniform = aggregate_uniform(&reports);
    Ok(SweepReport { mode, reports, uniform })
}

const CSV_HEADER: &str = "eps_label,N,D,p,C_fit\n";

fn push_row(out: &mut String, label: &str, intervals: usize, d: f64, p: Option<f64>) {
    let p = p.map(fmt_num).unwrap_or_default();
    let _ = writeln!(out, "{label},{intervals},{},{p},{}", fmt_num(d), fmt_num(c_fit(d, intervals)));
}

impl ConvergenceReport {
    /// Smallest reported order; absent orders are skipped.
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order).reduce(f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# mode={}\n", self.mode.as_str());
        out.push_str(CSV_HEADER);
        self.push_rows(&mut out);
        out
    }

    fn push_rows(&self, out: &mut String) {
        for r in &self.rows {
            push_row(out, &self.eps_label, r.intervals, r.error, r.order);
        }
    }
}

impl SweepReport {
    pub fn min_uniform_order(&self) -> Option<f64> {
        self.uniform.iter().filter_map(|r| r.p_uniform).reduce(f64::min)
    }

    /// Per-configuration rows followed by a `uniform` block.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# mode={}\n# configurations={}\n", self.mode.as_str(), self.reports.len());
        out.push_str(CSV_HEADER);
        for rep in &self.reports {
            rep.push_rows(&mut out);
        }
        out.push_str("# uniform\n");
        for r in &self.uniform {
            push_row(&mut out, "uniform", r.intervals, r.d_uniform, r.p_uniform);
        }
        out
    }
}
