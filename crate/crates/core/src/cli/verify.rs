//! Invariant checks on canned profiles, run by `logsp verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::CliError;
use crate::constants;
use crate::convolution::{origin_value, Convolver, Kernel, OriginRule};
use crate::fiber::FiberScalars;
use crate::functionals::Evaluator;
use crate::grid::{Field, Grid};
use crate::lpf;
use crate::params::Params;
use crate::profile::{discretize, ProfileSpec};

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub n: usize,
    /// Offset added to the log-kernel origin value.
    pub inject_origin: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { n: 128, inject_origin: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub grid: Grid,
    pub injected_origin: Option<f64>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

fn check(name: &'static str, measured: f64, tolerance: f64) -> CheckResult {
    CheckResult { name, measured, tolerance, passed: measured.is_finite() && measured <= tolerance }
}

fn rel(x: f64, reference: f64) -> f64 {
    ((x - reference) / reference).abs()
}

/// Runs every check; failures are reported in the result, not as errors.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let grid = Grid::new(opts.n, 20.0).map_err(|e| CliError::Config(e.to_string()))?;
    let h = grid.spacing();
    let mut origin = Kernel::ALL.map(|k| origin_value(k, h, OriginRule::default()));
    if let Some(delta) = opts.inject_origin {
        origin[0] += delta;
    }
    let ev = Evaluator::with_convolver(Convolver::with_origin_values(&grid, origin));
    let c = 1.3;
    let params = Params::new(1.0, 1.0, 3.0, c)?;
    let u = discretize(&ProfileSpec::gaussian(1.0, c), &grid)?;
    let mut checks = Vec::new();

    let t = 1.5;
    let ut = u.dilate(t)?;
    checks.push(check("dilation_preserves_mass", (ut.mass() - c).abs() / c, 1e-3));
    let (a, a_t) = (ev.kinetic(&u)?, ev.kinetic(&ut)?);
    checks.push(check("kinetic_scaling", rel(a_t / a, t * t), 1e-3));
    let (cp, cp_t) = (ev.pnorm(&u, 3.0)?, ev.pnorm(&ut, 3.0)?);
    checks.push(check("pnorm_scaling", rel(cp_t / cp, t), 1e-3));
    let (v, v1, v2) = ev.interaction(&u)?;
    let v_t = ev.v_total(&ut)?;
    checks.push(check("interaction_shift", (v_t - v + c * c * t.ln()).abs(), 1e-3));
    checks.push(check("v_splitting", (v - (v1 - v2)).abs() / (1.0 + v.abs()), 1e-10));

    let pi = std::f64::consts::PI;
    let euler = 0.577_215_664_901_532_9;
    checks.push(check("gaussian_kinetic", rel(a, c), 1e-3));
    checks.push(check("gaussian_pnorm", rel(cp, 2.0 * c.powf(1.5) / (3.0 * pi.sqrt())), 1e-3));
    checks.push(check("gaussian_interaction", rel(v, 0.5 * c * c * (2f64.ln() - euler)), 1e-3));

    let sc = FiberScalars::new(a, cp, v, params)?;
    let e_t = ev.energy(&ut, &params)?.energy;
    checks.push(check("fiber_matches_grid", rel(sc.g(t)?, e_t), 1e-3));

    let grad = ev.grad_energy(&u, &params)?;
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let dir = discretize(&ProfileSpec::random_smooth(seed, 1.0, 1.0), &grid)?;
        let eps = 1e-4;
        let shifted = |s: f64| -> Result<f64, CliError> {
            let w: Vec<f64> = u.values().iter().zip(dir.values()).map(|(x, d)| x + s * d).collect();
            Ok(ev.energy(&Field::new(grid, w)?, &params)?.energy)
        };
        let fd = (shifted(eps)? - shifted(-eps)?) / (2.0 * eps);
        let exact = grad.inner(&dir)?;
        worst = worst.max((fd - exact).abs() / exact.abs().max(1e-12));
    }
    checks.push(check("gradient_finite_difference", worst, 1e-5));

    let unit = Params::new(1.0, 1.0, 6.0, 1.0)?;
    let roots = FiberScalars::new(1.0, 1.0, 0.0, unit)?.critical_points()?;
    let disc = (1.0 - 4.0 * (2.0 / 3.0) * 0.25f64).sqrt();
    let oracle = [(0.75 * (1.0 - disc)).sqrt(), (0.75 * (1.0 + disc)).sqrt()];
    let root_err = if roots.len() == 2 {
        roots.iter().zip(oracle).map(|(r, o)| (r.s - o).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    checks.push(check("fiber_roots_closed_form", root_err, 1e-10));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0.0;
    for _ in 0..100 {
        let p = rng.gen_range(2.05..8.0);
        let params = Params::new(-rng.gen_range(0.01..10.0), -rng.gen_range(0.0..10.0), p, rng.gen_range(0.01..10.0))?;
        let sc = FiberScalars::new(rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0), rng.gen_range(-10.0..10.0), params)?;
        for k in 0..=240 {
            let t = 10f64.powf(-6.0 + 0.05 * k as f64);
            if sc.phi(t)? <= 0.0 {
                violations += 1.0;
            }
        }
    }
    checks.push(check("nonexistence_phi_positive", violations, 0.0));

    let gn = constants::kgn_cached(3.0)?;
    checks.push(check("gaussian_below_gn_constant", gn.gaussian - gn.kgn, 0.0));

    let mut buf = Vec::new();
    lpf::write_field(&mut buf, &u)?;
    let back = lpf::read_field(buf.as_slice())?;
    checks.push(check("lpf_roundtrip", back.l2_distance(&u)?, 0.0));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { grid, injected_origin: opts.inject_origin, checks, passed })
}
