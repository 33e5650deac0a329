//! Command-line front end. Each `cmd_*` function does the work of one
//! subcommand and returns structured data; [`run`] handles flags, files and
//! exit codes.

mod config;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{Axis, FiberOptions, GridConfig, Overrides, ParamsConfig, RunConfig, ScalarInput, SweepOptions};
pub use verify::{cmd_verify, CheckResult, VerifyOptions, VerifyReport};

use crate::constants::{self, GnEstimate, Provenance, SharpConstants};
use crate::error::{Branch, Error};
use crate::fiber::{self, BranchPoint, FiberScalars};
use crate::functionals::Evaluator;
use crate::lpf;
use crate::params::Params;
use crate::profile::discretize;
use crate::regime::{regime_classify, RegimeLabel, RegimeTag, Thresholds};
use crate::solvers::{self, Method, SolveError, SolveReport, TraceRow};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    VerificationFailed = 1,
    ConfigError = 2,
    NotConverged = 3,
    RegimeRefusal = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Refusal(String),
    #[error("{message}")]
    NotConverged { message: String, report: Option<Box<SolveReport>> },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::ConfigError,
            CliError::Refusal(_) => ExitCode::RegimeRefusal,
            CliError::Verification(_) => ExitCode::VerificationFailed,
            CliError::Core(Error::InvalidParameter(_) | Error::InvalidResolution(_) | Error::InvalidExtent(_)) => {
                ExitCode::ConfigError
            }
            CliError::NotConverged { .. } | CliError::Io { .. } | CliError::Core(_) => ExitCode::NotConverged,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        let message = e.to_string();
        match e {
            SolveError::Regime { .. } | SolveError::InitOutsideV { .. } => CliError::Refusal(message),
            SolveError::NotConverged(r) | SolveError::CapBoundary(r) | SolveError::GuardFloor(r) => {
                CliError::NotConverged { message, report: Some(r) }
            }
            SolveError::Core(e) => CliError::Core(e),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn sharp(p: f64) -> Result<(SharpConstants, GnEstimate), CliError> {
    let est = constants::kgn_cached(p)?;
    Ok((SharpConstants::with_kgn(p, est.kgn), est))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    #[serde(flatten)]
    pub label: RegimeLabel,
    pub kgn_method: Provenance,
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<ClassifyReport, CliError> {
    let params = cfg.params()?;
    let (sharp, est) = sharp(params.p)?;
    Ok(ClassifyReport { label: regime_classify(&params, &sharp)?, kgn_method: est.method })
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub kgn: f64,
    pub rayleigh: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub p: f64,
    pub kgn: f64,
    pub k0: Option<f64>,
    pub c0: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    #[serde(rename = "K2")]
    pub k2: Option<f64>,
    pub mass_critical: Option<f64>,
    pub kv2: f64,
    pub method: Provenance,
    pub kv2_method: Provenance,
    pub tolerances: Tolerances,
    pub gaussian_quotient: f64,
    pub rayleigh_quotient: f64,
    pub ground_state_mass: f64,
}

/// Sharp constants for `p`; `k₀`, `c₀` and the mass-critical bound appear when
/// the parameters they need are configured.
pub fn cmd_constants(cfg: &RunConfig) -> Result<ConstantsReport, CliError> {
    let p = cfg.exponent()?;
    let est = constants::kgn_cached(p)?;
    let ParamsConfig { gamma, a, c, .. } = cfg.params;
    let k0 = match (gamma, c) {
        (Some(gamma), Some(c)) => constants::k0(&Params { gamma, a: a.unwrap_or(0.0), p, c }).ok(),
        _ => None,
    };
    let c0 = match (gamma, a) {
        (Some(gamma), Some(a)) => constants::c0(p, a, gamma, est.kgn).ok(),
        _ => None,
    };
    let mass_critical = match a {
        Some(a) if p == 4.0 => constants::mass_critical_bound(a, est.kgn).ok(),
        _ => None,
    };
    Ok(ConstantsReport {
        p,
        kgn: est.kgn,
        k0,
        c0,
        k1: constants::k1(p, est.kgn).ok(),
        k2: constants::k2(p, est.kgn).ok(),
        mass_critical,
        kv2: constants::kv2_estimate()?,
        method: est.method,
        kv2_method: Provenance::EmpiricalFamily,
        tolerances: Tolerances { kgn: est.tolerance, rayleigh: constants::RAYLEIGH_TOLERANCE },
        gaussian_quotient: est.gaussian,
        rayleigh_quotient: est.rayleigh,
        ground_state_mass: est.ground_state_mass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberCurve {
    pub scalars: FiberScalars,
    pub t_star: Option<f64>,
    pub points: Vec<BranchPoint>,
    pub t_min: f64,
    pub t_max: f64,
    /// `[t, g, g', g'', φ]`
    #[serde(skip)]
    pub rows: Vec<[f64; 5]>,
}

/// Fiber curve of the configured scalars, or of the configured profile.
pub fn cmd_fiber(cfg: &RunConfig) -> Result<FiberCurve, CliError> {
    let params = cfg.params()?;
    let opts = &cfg.fiber;
    if opts.samples < 2 {
        return Err(CliError::Config("fiber.samples must be at least 2".into()));
    }
    let sc = match opts.scalars {
        Some(s) => FiberScalars::new(s.kinetic, s.pnorm, s.interaction, params).map_err(|e| CliError::Config(e.to_string()))?,
        None => {
            cfg.validate_solver()?;
            let grid = cfg.grid()?;
            let spec = crate::profile::ProfileSpec { mass: params.c, ..cfg.init.clone() };
            let u = discretize(&spec, &grid)?;
            fiber::scalars(&Evaluator::new(&grid), &u, &params)?
        }
    };
    let points = sc.critical_points()?;
    let (lo, hi) = match (points.first(), points.last()) {
        (Some(first), Some(last)) => (first.s / 10.0, last.s * 10.0),
        _ => (1e-2, 1e2),
    };
    let (t_min, t_max) = (opts.t_min.unwrap_or(lo), opts.t_max.unwrap_or(hi));
    let rows = sc.curve(t_min, t_max, opts.samples).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(FiberCurve { scalars: sc, t_star: sc.t_star().ok(), points, t_min, t_max, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub c: f64,
    pub tag: RegimeTag,
}

/// A change of regime between adjacent lattice points, located by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    /// Axis along which the edge was crossed, `"a"` or `"c"`.
    pub axis: &'static str,
    /// Value of the other coordinate.
    pub fixed: f64,
    /// Smallest value on the upper side of the transition.
    pub at: f64,
    pub below: RegimeTag,
    pub above: RegimeTag,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub p: f64,
    pub gamma: f64,
    pub kgn: f64,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
    pub edges: Vec<Edge>,
}

/// Regime labels over the `(a, c)` lattice, with every transition refined to
/// adjacent floating-point values.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Sweep, CliError> {
    let p = cfg.exponent()?;
    let gamma = cfg.params.gamma.ok_or_else(|| CliError::Config("missing parameter gamma".into()))?;
    if !gamma.is_finite() {
        return Err(CliError::Config("gamma must be finite".into()));
    }
    cfg.sweep.a.validate("a")?;
    cfg.sweep.c.validate("c")?;
    if cfg.sweep.c.min <= 0.0 {
        return Err(CliError::Config("sweep masses must be positive".into()));
    }
    let (sharp, est) = sharp(p)?;
    let tag = |a: f64, c: f64| regime_classify(&Params { gamma, a, p, c }, &sharp).map(|l| l.tag);
    let a_pts = cfg.sweep.a.points();
    let c_pts = cfg.sweep.c.points();

    let grid: Vec<Vec<RegimeTag>> = a_pts
        .par_iter()
        .map(|&a| c_pts.iter().map(|&c| tag(a, c)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let rows = a_pts
        .iter()
        .zip(&grid)
        .flat_map(|(&a, tags)| c_pts.iter().zip(tags).map(move |(&c, &tag)| SweepRow { a, c, tag }))
        .collect();

    let mut edges = Vec::new();
    for (i, &a) in a_pts.iter().enumerate() {
        for j in 1..c_pts.len() {
            if grid[i][j - 1] != grid[i][j] {
                let at = refine(c_pts[j - 1], c_pts[j], |c| tag(a, c))?;
                edges.push(Edge { axis: "c", fixed: a, at, below: grid[i][j - 1], above: grid[i][j] });
            }
        }
    }
    for (j, &c) in c_pts.iter().enumerate() {
        for i in 1..a_pts.len() {
            if grid[i - 1][j] != grid[i][j] {
                let at = refine(a_pts[i - 1], a_pts[i], |a| tag(a, c))?;
                edges.push(Edge { axis: "a", fixed: c, at, below: grid[i - 1][j], above: grid[i][j] });
            }
        }
    }
    Ok(Sweep { p, gamma, kgn: est.kgn, rows, edges })
}

/// Bisects `[lo, hi]` down to adjacent floats, returning the first value
/// whose tag differs from the tag at `lo`.
fn refine(mut lo: f64, mut hi: f64, tag: impl Fn(f64) -> Result<RegimeTag, Error>) -> Result<f64, Error> {
    let below = tag(lo)?;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(hi);
        }
        if tag(mid)? == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Solver matching a regime, when the regime has one.
pub fn auto_method(tag: RegimeTag) -> Option<Method> {
    match tag {
        RegimeTag::GlobalMin | RegimeTag::GlobalMinMassCritical => Some(Method::GlobalMinimize),
        RegimeTag::LocalMinPlusMountainPass => Some(Method::LambdaBranchMinimize(Branch::Plus)),
        RegimeTag::TwoCriticalPointsOnLambda | RegimeTag::MaxOnLambda => Some(Method::LambdaMaximize(Branch::Minus)),
        RegimeTag::NoCriticalPoint | RegimeTag::LambdaEmpty | RegimeTag::OpenUnknown => None,
    }
}

/// Runs the configured (or regime-selected) solver. An explicit `init_field`
/// replaces the configured profile.
pub fn cmd_solve(cfg: &RunConfig, init_field: Option<&Path>) -> Result<SolveReport, CliError> {
    let params = cfg.params()?;
    cfg.validate_solver()?;
    let grid = cfg.grid()?;
    let method = match cfg.method {
        Some(m) => m,
        None => {
            let label = cmd_classify(cfg)?.label;
            auto_method(label.tag).ok_or_else(|| CliError::Refusal(format!("no solver for this regime: {}", label.explain())))?
        }
    };
    let result = match init_field {
        Some(path) => {
            let u = lpf::load(path)?;
            solvers::solve_field(method, &params, &cfg.solver, &u)
        }
        None => solvers::solve(method, &params, &grid, &cfg.solver, &cfg.init),
    };
    Ok(result?)
}

#[derive(Serialize)]
struct SolveDocument<'a> {
    status: &'a str,
    message: Option<&'a str>,
    config: &'a RunConfig,
    constants: SolveConstants,
    report: &'a SolveReport,
}

#[derive(Serialize)]
struct SolveConstants {
    kgn: GnEstimate,
    kv2: Option<f64>,
}

/// Writes `solution.lpf`, `report.json` and (when traced) `trace.csv`.
pub fn write_solve_outputs(dir: &Path, cfg: &RunConfig, report: &SolveReport, message: Option<&str>) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let field_path = dir.join("solution.lpf");
    lpf::save(&field_path, &report.field)?;
    let doc = SolveDocument {
        status: if report.converged { "converged" } else { "not_converged" },
        message,
        config: cfg,
        constants: SolveConstants {
            kgn: constants::kgn_cached(report.params.p)?,
            kv2: report.lower_bound.map(|_| constants::kv2_estimate()).transpose()?,
        },
        report,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
    let path = dir.join("report.json");
    fs::write(&path, json).map_err(io_err(&path))?;
    if cfg.solver.trace {
        write_trace(&dir.join("trace.csv"), &report.trace)?;
    }
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<(), CliError> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(out.as_bytes()).map_err(io_err(path))
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<(), CliError> {
    let rows = trace.iter().map(|r| {
        format!("{},{:e},{:e},{:e},{:e},{:e},{:e}", r.iter, r.energy, r.q, r.grad_res, r.kinetic, r.pnorm, r.interaction)
    });
    write_csv(path, "iter,F,Q,grad_res,A,C,V", rows)
}

pub fn write_fiber(path: &Path, curve: &FiberCurve) -> Result<(), CliError> {
    let rows = curve.rows.iter().map(|r| format!("{:e},{:e},{:e},{:e},{:e}", r[0], r[1], r[2], r[3], r[4]));
    write_csv(path, "t,g,dg,ddg,phi", rows)
}

pub fn write_sweep(dir: &Path, sweep: &Sweep) -> Result<(), CliError> {
    write_csv(&dir.join("sweep.csv"), "a,c,tag", sweep.rows.iter().map(|r| format!("{:e},{:e},{}", r.a, r.c, r.tag)))?;
    let edges = sweep.edges.iter().map(|e| format!("{},{:e},{:e},{},{}", e.axis, e.fixed, e.at, e.below, e.above));
    write_csv(&dir.join("sweep_edges.csv"), "axis,fixed,at,below,above", edges)
}

/// Closed-form thresholds for a parameter set, as reported by `classify`.
pub fn thresholds(params: &Params) -> Result<Thresholds, CliError> {
    Ok(Thresholds::compute(params, constants::kgn_cached(params.p)?.kgn))
}

#[derive(Debug, Parser)]
#[command(name = "logsp", version, about = "Normalized solutions of the planar Schrödinger–Poisson system with logarithmic kernel")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the per-iteration trace.
    #[arg(long, global = true)]
    pub trace: bool,
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    #[arg(long = "grid-L", global = true)]
    pub grid_l: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the parameters and print the certificate.
    Classify,
    /// Run the solver admitted by the regime.
    Solve {
        /// global_minimize, local_minimize_capped, lambda_branch_minimize or lambda_maximize.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        branch: Option<Branch>,
        /// Start from a saved LPF1 field instead of the configured profile.
        #[arg(long, value_name = "PATH")]
        init_field: Option<PathBuf>,
    },
    /// Sample the fiber map of a profile or of given scalars.
    Fiber {
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Label an (a, c) lattice with regimes.
    Sweep {
        /// min,max,count[,log]
        #[arg(long = "a-range")]
        a_range: Option<Axis>,
        /// min,max,count[,log]
        #[arg(long = "c-range")]
        c_range: Option<Axis>,
    },
    /// Print the sharp constants for p.
    Constants,
    /// Run the invariant checks on canned profiles.
    Verify {
        /// Grid resolution of the checks.
        #[arg(long, default_value_t = 128)]
        verify_n: usize,
        /// Add this offset to the log-kernel origin value (fault injection).
        #[arg(long, allow_hyphen_values = true)]
        inject_origin: Option<f64>,
    },
}

fn load_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        gamma: g.gamma,
        a: g.a,
        p: g.p,
        c: g.c,
        grid_n: g.grid_n,
        grid_extent: g.grid_l,
        seed: g.seed,
        trace: g.trace,
        out: g.out.clone(),
    });
    Ok(cfg)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    match writeln!(std::io::stdout(), "{s}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io { path: "<stdout>".into(), source: e }),
        _ => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Classify => print_json(&cmd_classify(&cfg)?),
        Command::Constants => print_json(&cmd_constants(&cfg)?),
        Command::Solve { method, branch, init_field } => {
            cfg = cfg.with_method(method.as_deref(), branch)?;
            let dir = cfg.output_dir();
            match cmd_solve(&cfg, init_field.as_deref()) {
                Ok(report) => {
                    write_solve_outputs(&dir, &cfg, &report, None)?;
                    print_json(&SolveSummary::from(&report))
                }
                Err(CliError::NotConverged { message, report: Some(report) }) => {
                    write_solve_outputs(&dir, &cfg, &report, Some(&message))?;
                    Err(CliError::NotConverged { message, report: Some(report) })
                }
                Err(e) => Err(e),
            }
        }
        Command::Fiber { t_min, t_max, samples } => {
            cfg.fiber.t_min = t_min.or(cfg.fiber.t_min);
            cfg.fiber.t_max = t_max.or(cfg.fiber.t_max);
            cfg.fiber.samples = samples.unwrap_or(cfg.fiber.samples);
            let curve = cmd_fiber(&cfg)?;
            let dir = cfg.output_dir();
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            write_fiber(&dir.join("fiber.csv"), &curve)?;
            print_json(&curve)
        }
        Command::Sweep { a_range, c_range } => {
            cfg.sweep.a = a_range.unwrap_or(cfg.sweep.a);
            cfg.sweep.c = c_range.unwrap_or(cfg.sweep.c);
            let sweep = cmd_sweep(&cfg)?;
            let dir = cfg.output_dir();
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            write_sweep(&dir, &sweep)?;
            print_json(&sweep)
        }
        Command::Verify { verify_n, inject_origin } => {
            let report = cmd_verify(&VerifyOptions { n: verify_n, inject_origin })?;
            print_json(&report)?;
            if let Some(dir) = &cli.global.out {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
                let path = dir.join("verify.json");
                let s = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?;
                fs::write(&path, s).map_err(io_err(&path))?;
            }
            match report.failures().as_slice() {
                [] => Ok(()),
                names => Err(CliError::Verification(names.join(", "))),
            }
        }
    }
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    solver: &'a str,
    converged: bool,
    #[serde(rename = "F")]
    energy: f64,
    lambda: f64,
    q_residual: f64,
    pohozaev_residual: f64,
    el_residual: f64,
    iters: usize,
}

impl<'a> From<&'a SolveReport> for SolveSummary<'a> {
    fn from(r: &'a SolveReport) -> Self {
        SolveSummary {
            solver: &r.solver,
            converged: r.converged,
            energy: r.breakdown.energy,
            lambda: r.lambda,
            q_residual: r.q_residual,
            pohozaev_residual: r.pohozaev_residual,
            el_residual: r.el_residual,
            iters: r.iters,
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::ConfigError as i32 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::Success as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    }
}
