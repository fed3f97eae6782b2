use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use shishkin::analysis::{
    convergence_study, default_eps_grid, uniform_sweep, AnalysisError, Mode, DEFAULT_K_EXPONENTS,
    DEFAULT_TOP_EXPONENTS,
};
use shishkin::mesh::{interaction_points, MeshError, ShishkinMesh};
use shishkin::output::{fmt_num, mesh_csv, solution_csv};
use shishkin::problem::{ProblemError, ProblemSpec, ValidatedProblem, DEFAULT_SAMPLE_COUNT};
use shishkin::solver::{
    certify_max_principle_with, certify_stability_with, decompose, march_with, MarchOptions, RhsMode, SolveError,
    Tolerances,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_MESH: u8 = 4;
const EXIT_BAND: u8 = 5;

/// Backward Euler on Shishkin meshes for singularly perturbed linear systems.
#[derive(Debug, Parser)]
#[command(name = "shishkin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the structural conditions and report alpha.
    Validate(Common),
    /// Write the Shishkin mesh as CSV.
    Mesh {
        #[command(flatten)]
        common: Common,
        /// Number of mesh intervals.
        #[arg(short = 'N', long = "N")]
        intervals: usize,
    },
    /// Solve on the Shishkin mesh and write the grid as CSV.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'N', long = "N")]
        intervals: usize,
        /// Also write the smooth and singular components.
        #[arg(long)]
        decompose: bool,
        /// Check the discrete maximum principle and stability bound.
        #[arg(long)]
        certify: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Error and order table for a doubling list of N.
    Converge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        harness: HarnessArgs,
    },
    /// Parameter-uniform sweep over a grid of eps vectors.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        harness: HarnessArgs,
        /// Exponents e with eps_n = 2^-e.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TOP_EXPONENTS.to_vec())]
        top_exponents: Vec<u32>,
        /// Exponents k with eps_i = eps_{i+1} 2^-k.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_K_EXPONENTS.to_vec())]
        k_exponents: Vec<u32>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Problem JSON file.
    #[arg(long = "problem", value_name = "PATH")]
    problem_flag: Option<PathBuf>,
    /// Problem JSON file (alternative to --problem).
    #[arg(value_name = "PROBLEM", conflicts_with = "problem_flag")]
    problem_pos: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV/text.
    #[arg(long)]
    json: bool,
    /// Number of samples of [0, T] used to check the conditions.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
    samples: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    #[value(name = "two_mesh", alias = "two-mesh")]
    TwoMesh,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::ExactOracle,
            ModeArg::TwoMesh => Mode::TwoMesh,
        }
    }
}

#[derive(Debug, Args)]
struct HarnessArgs {
    #[arg(long, value_enum, default_value = "two_mesh")]
    mode: ModeArg,
    /// Doubling list of interval counts.
    #[arg(short = 'N', long = "N", value_delimiter = ',', default_values_t = vec![128, 256, 512, 1024, 2048])]
    intervals: Vec<usize>,
    /// Exit with status 5 if any reported order falls below this.
    #[arg(long)]
    min_order: Option<f64>,
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long)]
    residual_tol: Option<f64>,
    #[arg(long)]
    max_principle_tol: Option<f64>,
    #[arg(long)]
    stability_tol: Option<f64>,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.residual_tol {
            t.step_residual = v;
        }
        if let Some(v) = self.max_principle_tol {
            t.max_principle = v;
        }
        if let Some(v) = self.stability_tol {
            t.stability = v;
        }
        t
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Self { code, message: message.to_string() }
    }
}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        let code = if e.condition().is_some() { EXIT_VALIDATION } else { EXIT_PARSE };
        Failure::new(code, e)
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        Failure::new(EXIT_MESH, e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Mesh(m) => m.into(),
            other => Failure::new(EXIT_FAILURE, other),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Mesh(m) => m.into(),
            AnalysisError::Solve(s) => s.into(),
            AnalysisError::Problem(p) => p.into(),
            AnalysisError::NotDoubling(_) => Failure::new(EXIT_PARSE, e),
            other => Failure::new(EXIT_FAILURE, other),
        }
    }
}

type Outcome = Result<(), Failure>;

impl Common {
    fn path(&self) -> Result<&Path, Failure> {
        self.problem_flag
            .as_deref()
            .or(self.problem_pos.as_deref())
            .ok_or_else(|| Failure::new(EXIT_PARSE, "no problem file given (use --problem <path>)"))
    }

    fn load(&self) -> Result<ValidatedProblem, Failure> {
        let path = self.path()?;
        let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
        let spec = ProblemSpec::from_json_str(&text).map_err(|e| located(path, e))?;
        spec.validate(self.samples).map_err(|e| located(path, e))
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_FAILURE, e))
            }
        }
    }
}

fn located(path: &Path, e: ProblemError) -> Failure {
    let f: Failure = e.into();
    Failure::new(f.code, format!("{}: {}", path.display(), f.message))
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn validate(c: &Common) -> Outcome {
    let vp = c.load()?;
    let text = if c.json {
        json_text(&json!({
            "n": vp.n(),
            "alpha": vp.alpha(),
            "T": vp.horizon(),
            "eps": vp.eps().as_slice(),
            "required_T": 2.0 * vp.eps().largest() / vp.alpha(),
            "samples": vp.sample_count(),
            "constant_coefficients": vp.spec().has_constant_coefficients(),
        }))
    } else {
        format!(
            "ok: n = {}, alpha = {}, T = {} >= 2*eps_n/alpha = {}\n",
            vp.n(),
            vp.alpha(),
            vp.horizon(),
            2.0 * vp.eps().largest() / vp.alpha()
        )
    };
    c.emit(&text)
}

fn mesh(c: &Common, intervals: usize) -> Outcome {
    let vp = c.load()?;
    let mesh = ShishkinMesh::build(&vp, intervals)?;
    let text = if c.json {
        let ip: Vec<_> = interaction_points(vp.eps(), vp.alpha())
            .iter()
            .map(|(i, j, t)| json!({"i": i + 1, "j": j + 1, "t": t}))
            .collect();
        json_text(&json!({
            "N": intervals,
            "alpha": vp.alpha(),
            "b": mesh.class_label(),
            "sigmas": mesh.sigmas(),
            "counts": mesh.counts(),
            "points": mesh.points(),
            "interaction_points": ip,
        }))
    } else {
        mesh_csv(&mesh)
    };
    c.emit(&text)
}

fn solve(c: &Common, intervals: usize, with_parts: bool, certify: bool, tol: &TolArgs) -> Outcome {
    let vp = c.load()?;
    let mesh = Arc::new(ShishkinMesh::build(&vp, intervals)?);
    let opts = MarchOptions { tolerances: tol.tolerances(), cache_factorizations: true };
    let grid = march_with(&vp, &mesh, vp.spec().u0(), RhsMode::GivenF, &opts)?;
    let parts = if with_parts { Some(decompose(&vp, &mesh)?) } else { None };

    let mut comments = vec![format!("alpha={}", fmt_num(vp.alpha()))];
    let mut certs = None;
    if certify {
        let mp = certify_max_principle_with(&vp, &grid, &opts.tolerances);
        let st = certify_stability_with(&vp, &grid, &opts.tolerances);
        comments.push(format!("max_principle={mp:?}"));
        comments.push(format!("stability bound={} max_norm={} ok={}", fmt_num(st.bound), fmt_num(st.max_norm), st.ok));
        certs = Some((mp, st));
    }

    let text = if c.json {
        let component = |g: &shishkin::solver::SolutionGrid| -> Vec<Vec<f64>> { (0..g.n()).map(|i| g.component(i).collect()).collect() };
        let mut v = json!({
            "N": intervals,
            "alpha": vp.alpha(),
            "b": mesh.class_label(),
            "t": mesh.points(),
            "U": component(&grid),
        });
        if let Some(p) = &parts {
            v["V"] = json!(component(&p.smooth));
            v["W"] = json!(component(&p.singular));
        }
        if let Some((mp, st)) = &certs {
            v["max_principle"] = json!(mp);
            v["stability"] = json!(st);
        }
        json_text(&v)
    } else {
        solution_csv(&grid, parts.as_ref(), &comments)
    };
    c.emit(&text)?;

    if let Some((mp, st)) = certs {
        if !mp.passed() {
            return Err(Failure::new(EXIT_BAND, format!("discrete maximum principle violated: {mp:?}")));
        }
        if !st.ok {
            return Err(Failure::new(
                EXIT_BAND,
                format!("stability bound violated: max |U| = {} > {}", st.max_norm, st.bound),
            ));
        }
    }
    Ok(())
}

fn check_min_order(min_order: Option<f64>, observed: Option<f64>) -> Outcome {
    match (min_order, observed) {
        (Some(floor), Some(p)) if p < floor => {
            Err(Failure::new(EXIT_BAND, format!("observed order {p} is below --min-order {floor}")))
        }
        (Some(floor), None) => Err(Failure::new(EXIT_BAND, format!("no order could be computed to compare with --min-order {floor}"))),
        _ => Ok(()),
    }
}

fn converge(c: &Common, h: &HarnessArgs) -> Outcome {
    let vp = c.load()?;
    let report = convergence_study(&vp, &h.intervals, h.mode.into())?;
    let text = if c.json { json_text(&json!(report)) } else { report.to_csv() };
    c.emit(&text)?;
    check_min_order(h.min_order, report.min_order())
}

fn sweep(c: &Common, h: &HarnessArgs, tops: &[u32], ks: &[u32]) -> Outcome {
    let vp = c.load()?;
    let grid = default_eps_grid(vp.n(), tops, ks)?;
    let report = uniform_sweep(&vp, &grid, &h.intervals, h.mode.into())?;
    let text = if c.json { json_text(&json!(report)) } else { report.to_csv() };
    c.emit(&text)?;
    check_min_order(h.min_order, report.min_uniform_order())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Validate(c) => validate(c),
        Command::Mesh { common, intervals } => mesh(common, *intervals),
        Command::Solve { common, intervals, decompose, certify, tol } => solve(common, *intervals, *decompose, *certify, tol),
        Command::Converge { common, harness } => converge(common, harness),
        Command::Sweep { common, harness, top_exponents, k_exponents } => sweep(common, harness, top_exponents, k_exponents),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
