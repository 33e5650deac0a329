//! Regime-specific constrained flows and verification probes.

mod flow;
mod probes;

use serde::{Deserialize, Serialize};

pub use flow::{StopReason, TraceRow, SOLVE_BOUNDARY_LIMIT};


use crate::constants::{self, SharpConstants};
use crate::error::{Branch, Error};
use crate::fiber::{BranchPoint, FiberScalars};
use crate::functionals::{self, EnergyBreakdown, Evaluator};
use crate::grid::{Field, Grid};
use crate::params::Params;
use crate::profile::{discretize, ProfileSpec};
use crate::regime::{regime_classify, RegimeLabel, RegimeTag};
use flow::{Flow, Mode};
pub use probes::{masscritical_probe, two_bump_probe, MassCriticalProbe, ProbeRow, TwoBumpProbe, TwoBumpProbeConfig};

fn default_tol() -> f64 {
    1e-4
}

/// Stopping and line-search controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative Euler–Lagrange (tangent gradient) tolerance.
    pub tol_grad: f64,
    /// Tolerance on `|Q| / (A + |γ|c²/4)`.
    pub tol_q: f64,
    pub max_iter: usize,
    /// Initial step; defaults to `0.1 / max(1, A(init))`.
    pub step0: Option<f64>,
    pub backtrack: f64,
    pub armijo: f64,
    pub seed: u64,
    /// Amplitude (relative L² size) of a seeded random perturbation added to the
    /// initial profile; zero disables it.
    pub perturbation: f64,
    /// Minimum of `(t*)² A - k₀`, relative to `k₀`, kept by ascent modes.
    pub v_margin: f64,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_grad: default_tol(),
            tol_q: default_tol(),
            max_iter: 5000,
            step0: None,
            backtrack: 0.5,
            armijo: 1e-4,
            seed: 0,
            perturbation: 0.0,
            v_margin: 1e-3,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(self.tol_grad > 0.0 && self.tol_q > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo constant must lie in (0, 1)");
        }
        if let Some(s) = self.step0 {
            if !(s > 0.0 && s.is_finite()) {
                return bad("step0 must be positive");
            }
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return bad("perturbation must be non-negative");
        }
        if !(self.v_margin >= 0.0) {
            return bad("v_margin must be non-negative");
        }
        Ok(())
    }
}

/// Fiber information for branch solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchInfo {
    pub branch: Branch,
    /// Critical point of the final field's fiber on the requested branch.
    pub point: BranchPoint,
    /// All fiber critical points of the final field.
    pub points: Vec<BranchPoint>,
    pub t_star: Option<f64>,
}

/// Diagnostics of one solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub field: Field,
    pub solver: String,
    pub converged: bool,
    pub stop: StopReason,
    pub params: Params,
    pub grid: Grid,
    pub breakdown: EnergyBreakdown,
    pub lambda: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// `|Q| / (A + |γ|c²/4)`
    pub q_residual: f64,
    pub pohozaev_residual: f64,
    pub el_residual: f64,
    pub iters: usize,
    pub boundary_fraction: f64,
    pub regime: RegimeLabel,
    pub branch: Option<BranchInfo>,
    /// Energy lower bound from the V₂ and GN inequalities with estimated constants.
    pub lower_bound: Option<f64>,
    pub seed: u64,
    pub config: SolverConfig,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("{solver} refuses regime {}: {}", .label.tag, .label.explain())]
    Regime { solver: &'static str, label: Box<RegimeLabel> },
    #[error("initial profile lies outside the projectable set ((t*)^2 A - k0 = {margin:.4e})")]
    InitOutsideV { margin: f64 },
    #[error("no convergence after {} iterations ({:?}); el_residual {:.3e}, q_residual {:.3e}", .0.iters, .0.stop, .0.el_residual, .0.q_residual)]
    NotConverged(Box<SolveReport>),
    #[error("flow converged onto the kinetic cap A = k0 (A = {:.6e})", .0.breakdown.kinetic)]
    CapBoundary(Box<SolveReport>),
    #[error("iterate driven to the boundary of the projectable set after {} iterations", .0.iters)]
    GuardFloor(Box<SolveReport>),
    #[error(transparent)]
    Core(#[from] Error),
}

impl SolveError {
    /// The partial report, when one exists.
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            SolveError::NotConverged(r) | SolveError::CapBoundary(r) | SolveError::GuardFloor(r) => Some(r),
            _ => None,
        }
    }
}

/// Which flow to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method", content = "branch")]
pub enum Method {
    GlobalMinimize,
    LocalMinimizeCapped,
    LambdaBranchMinimize(Branch),
    LambdaMaximize(Branch),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::GlobalMinimize => "global_minimize",
            Method::LocalMinimizeCapped => "local_minimize_capped",
            Method::LambdaBranchMinimize(_) => "lambda_branch_minimize",
            Method::LambdaMaximize(_) => "lambda_maximize",
        }
    }

    fn admits(self, tag: RegimeTag) -> bool {
        match self {
            Method::GlobalMinimize => matches!(tag, RegimeTag::GlobalMin | RegimeTag::GlobalMinMassCritical),
            Method::LocalMinimizeCapped | Method::LambdaBranchMinimize(_) => tag == RegimeTag::LocalMinPlusMountainPass,
            Method::LambdaMaximize(_) => matches!(tag, RegimeTag::TwoCriticalPointsOnLambda | RegimeTag::MaxOnLambda),
        }
    }
}

pub fn global_minimize(params: &Params, grid: &Grid, config: &SolverConfig, init: &ProfileSpec) -> Result<SolveReport, SolveError> {
    solve(Method::GlobalMinimize, params, grid, config, init)
}

pub fn local_minimize_capped(params: &Params, grid: &Grid, config: &SolverConfig, init: &ProfileSpec) -> Result<SolveReport, SolveError> {
    solve(Method::LocalMinimizeCapped, params, grid, config, init)
}

pub fn lambda_branch_minimize(
    params: &Params,
    grid: &Grid,
    config: &SolverConfig,
    init: &ProfileSpec,
    branch: Branch,
) -> Result<SolveReport, SolveError> {
    solve(Method::LambdaBranchMinimize(branch), params, grid, config, init)
}

pub fn lambda_maximize(
    params: &Params,
    grid: &Grid,
    config: &SolverConfig,
    init: &ProfileSpec,
    branch: Branch,
) -> Result<SolveReport, SolveError> {
    solve(Method::LambdaMaximize(branch), params, grid, config, init)
}

/// Classifies `params` and refuses methods whose hypotheses fail.
pub fn check_regime(method: Method, params: &Params) -> Result<RegimeLabel, SolveError> {
    let sharp = SharpConstants::estimate(params.p)?;
    let label = regime_classify(params, &sharp)?;
    if !method.admits(label.tag) {
        return Err(SolveError::Regime { solver: method.name(), label: Box::new(label) });
    }
    Ok(label)
}

/// Discretizes `init` (with mass `params.c`) and runs `method`.
pub fn solve(method: Method, params: &Params, grid: &Grid, config: &SolverConfig, init: &ProfileSpec) -> Result<SolveReport, SolveError> {
    params.validate()?;
    config.validate()?;
    let label = check_regime(method, params)?;
    let spec = ProfileSpec { mass: params.c, ..init.clone() };
    let u0 = discretize(&spec, grid)?;
    run(method, params, config, u0, label)
}

/// Runs `method` from an explicit initial field (rescaled to mass `params.c`).
pub fn solve_field(method: Method, params: &Params, config: &SolverConfig, init: &Field) -> Result<SolveReport, SolveError> {
    params.validate()?;
    config.validate()?;
    let label = check_regime(method, params)?;
    run(method, params, config, init.normalize(params.c)?, label)
}

fn perturb(u: Field, config: &SolverConfig, c: f64) -> Result<Field, Error> {
    if config.perturbation == 0.0 {
        return Ok(u);
    }
    let grid = *u.grid();
    let noise = discretize(&ProfileSpec::random_smooth(config.seed, 1.0, c), &grid)?;
    let amp = config.perturbation;
    let values = u.values().iter().zip(noise.values()).map(|(a, b)| a + amp * b).collect();
    Field::new(grid, values)?.normalize(c)
}

fn run(method: Method, params: &Params, config: &SolverConfig, u0: Field, label: RegimeLabel) -> Result<SolveReport, SolveError> {
    let grid = *u0.grid();
    let ev = Evaluator::new(&grid);
    let c = params.c;
    let mut u = perturb(u0, config, c)?;

    let mode = match method {
        Method::GlobalMinimize => Mode::Descent,
        Method::LocalMinimizeCapped => {
            let k0 = constants::k0(params)?;
            for _ in 0..20 {
                let a = ev.kinetic(&u)?;
                if a < k0 {
                    break;
                }
                u = u.dilate(0.9 * (k0 / a).sqrt())?.normalize(c)?;
            }
            Mode::Capped { k0 }
        }
        Method::LambdaBranchMinimize(branch) => {
            u = crate::fiber::project_to_lambda(&ev, &u, params, branch)?.field;
            Mode::Branch { branch, ascent: false, guard: None }
        }
        Method::LambdaMaximize(branch) => {
            let sc = crate::fiber::scalars(&ev, &u, params)?;
            let m = sc.in_v()?;
            if !m.inside {
                return Err(SolveError::InitOutsideV { margin: m.margin });
            }
            u = crate::fiber::project_to_lambda(&ev, &u, params, branch)?.field;
            Mode::Branch { branch, ascent: true, guard: Some(config.v_margin * constants::k0(params)?) }
        }
    };

    let flow = Flow { ev: &ev, params: *params, config, mode };
    let res = flow.run(u)?;
    let e = res.eval.breakdown;
    let q = functionals::pohozaev_q(&e, params);
    let pohozaev_residual = functionals::pohozaev_residual(&e, params, res.lambda);
    let boundary_fraction = res.field.boundary_mass_fraction()?;

    let branch = match mode {
        Mode::Branch { branch, .. } => {
            let sc = FiberScalars::new(e.kinetic, e.pnorm, e.interaction, *params)?;
            let points = sc.critical_points()?;
            let point = points.iter().copied().find(|bp| bp.branch == branch);
            point.map(|point| BranchInfo { branch, point, points: points.clone(), t_star: sc.t_star().ok() })
        }
        _ => None,
    };
    let branch_ok = match mode {
        Mode::Branch { .. } => branch.as_ref().is_some_and(|b| (b.point.s - 1.0).abs() < 10.0 * config.tol_q),
        _ => true,
    };
    let lower_bound = match method {
        Method::GlobalMinimize => {
            let kv2 = constants::kv2_estimate()?;
            let kgn = label.thresholds.kgn;
            let a = e.kinetic;
            Some(
                0.5 * a
                    - 0.25 * params.gamma.abs() * kv2 * a.sqrt() * c.powf(1.5)
                    - params.a.max(0.0) / params.p * kgn * a.powf(0.5 * params.p - 1.0) * c,
            )
        }
        _ => None,
    };
    let converged = res.stop == StopReason::Converged
        && branch_ok
        && pohozaev_residual < 10.0 * config.tol_grad
        && res.el_residual < config.tol_grad;

    let report = SolveReport {
        field: res.field,
        solver: method.name().into(),
        converged,
        stop: res.stop,
        params: *params,
        grid,
        breakdown: e,
        lambda: res.lambda,
        q,
        q_residual: res.q_relative,
        pohozaev_residual,
        el_residual: res.el_residual,
        iters: res.iters,
        boundary_fraction,
        regime: label,
        branch,
        lower_bound,
        seed: config.seed,
        config: config.clone(),
        trace: res.trace,
    };
    match (method, res.stop) {
        (_, StopReason::GuardFloor) => Err(SolveError::GuardFloor(Box::new(report))),
        (Method::LocalMinimizeCapped, _) if converged && e.kinetic >= (1.0 - 1e-6) * constants::k0(params)? => {
            Err(SolveError::CapBoundary(Box::new(report)))
        }
        _ if converged => Ok(report),
        _ => Err(SolveError::NotConverged(Box::new(report))),
    }
}
