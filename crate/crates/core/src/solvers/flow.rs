//! Projected, preconditioned gradient flows on the mass sphere.

use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::error::{Branch, Error, Result};
use crate::fiber::{BranchPoint, FiberScalars};
use crate::functionals::{self, el_residual_from, Evaluation, Evaluator};
use crate::grid::{dot, Field};
use crate::params::Params;

/// Boundary mass fraction tolerated during a solve.
pub const SOLVE_BOUNDARY_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Mode {
    /// Minimize `F` on `S(c)`.
    Descent,
    /// Minimize `F` on `S(c) ∩ {A ≤ k0}`.
    Capped { k0: f64 },
    /// Minimize (or maximize) `u ↦ F(u^{s(u)})` for one branch of fiber critical points.
    Branch { branch: Branch, ascent: bool, guard: Option<f64> },
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    #[serde(rename = "F")]
    pub energy: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub grad_res: f64,
    #[serde(rename = "A")]
    pub kinetic: f64,
    #[serde(rename = "C")]
    pub pnorm: f64,
    #[serde(rename = "V")]
    pub interaction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    Stalled,
    GuardFloor,
    CapBoundary,
}

pub(crate) struct FlowResult {
    pub field: Field,
    pub eval: Evaluation,
    pub lambda: f64,
    pub el_residual: f64,
    pub q_relative: f64,
    pub iters: usize,
    pub stop: StopReason,
    pub trace: Vec<TraceRow>,
}

struct Trial {
    field: Field,
    value: f64,
    point: Option<BranchPoint>,
}

enum TrialOutcome {
    Ok(Trial),
    /// Step left the admissible set; shrink.
    Reject { guard: bool },
}

pub(crate) struct Flow<'a> {
    pub ev: &'a Evaluator,
    pub params: Params,
    pub config: &'a SolverConfig,
    pub mode: Mode,
}

impl Flow<'_> {
    fn scalars(&self, e: &functionals::EnergyBreakdown) -> Result<FiberScalars> {
        FiberScalars::new(e.kinetic, e.pnorm, e.interaction, self.params)
    }

    /// Objective value and branch point of a field on the sphere.
    fn objective(&self, u: &Field) -> Result<TrialOutcome> {
        let e = self.ev.energy(u, &self.params)?;
        match self.mode {
            Mode::Descent => Ok(TrialOutcome::Ok(Trial { field: u.clone(), value: e.energy, point: None })),
            Mode::Capped { k0 } => {
                if e.kinetic > k0 {
                    Ok(TrialOutcome::Reject { guard: false })
                } else {
                    Ok(TrialOutcome::Ok(Trial { field: u.clone(), value: e.energy, point: None }))
                }
            }
            Mode::Branch { branch, guard, .. } => {
                let sc = self.scalars(&e)?;
                if let Some(margin) = guard {
                    let m = sc.in_v()?;
                    if m.margin < margin {
                        return Ok(TrialOutcome::Reject { guard: true });
                    }
                }
                match sc.branch_point(branch) {
                    Ok(bp) => Ok(TrialOutcome::Ok(Trial { field: u.clone(), value: bp.g, point: Some(bp) })),
                    Err(Error::BranchAbsent(_)) | Err(Error::Bracketing(_)) => Ok(TrialOutcome::Reject { guard: false }),
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// Moves a trial point onto the branch by dilation.
    fn settle(&self, trial: Trial) -> Result<Field> {
        match trial.point {
            Some(bp) if (bp.s - 1.0).abs() >= 1e-10 => trial.field.dilate(bp.s)?.normalize(self.params.c),
            _ => Ok(trial.field),
        }
    }

    /// Runs the flow from `u0`, which must already lie on `S(c)` (and on the
    /// branch for branch modes).
    pub fn run(&self, u0: Field) -> Result<FlowResult> {
        let cfg = self.config;
        let params = self.params;
        let area = self.ev.grid().cell_area();
        let ascent = matches!(self.mode, Mode::Branch { ascent: true, .. });
        let sign = if ascent { 1.0 } else { -1.0 };
        let mut u = u0;
        let mut trace = Vec::new();
        let mut tau = f64::NAN;
        let mut iter = 0usize;
        loop {
            let eval = self.ev.evaluate(&u, &params)?;
            let e = eval.breakdown;
            let lambda = functionals::multiplier(&e, &params);
            let el = el_residual_from(&eval, u.values(), &params, lambda, area);
            let q = functionals::pohozaev_q(&e, &params);
            let q_rel = q.abs() / functionals::q_scale(&e, &params);
            if cfg.trace {
                trace.push(TraceRow {
                    iter,
                    energy: e.energy,
                    q,
                    grad_res: el,
                    kinetic: e.kinetic,
                    pnorm: e.pnorm,
                    interaction: e.interaction,
                });
            }
            let finish = |stop, u: Field, eval: Evaluation, trace: Vec<TraceRow>| FlowResult {
                field: u,
                eval,
                lambda,
                el_residual: el,
                q_relative: q_rel,
                iters: iter,
                stop,
                trace,
            };
            if el < cfg.tol_grad && q_rel < cfg.tol_q {
                return Ok(finish(StopReason::Converged, u, eval, trace));
            }
            if iter >= cfg.max_iter {
                return Ok(finish(StopReason::MaxIter, u, eval, trace));
            }
            if tau.is_nan() {
                tau = cfg.step0.unwrap_or(0.1 / e.kinetic.max(1.0));
            }

            let direction = self.direction(&u, &eval, lambda)?;
            let slope = dot(&eval.gradient, &direction) * area;
            let current = match self.objective(&u)? {
                TrialOutcome::Ok(t) => t.value,
                TrialOutcome::Reject { guard: true } => {
                    return Ok(finish(StopReason::GuardFloor, u, eval, trace));
                }
                TrialOutcome::Reject { guard: false } => {
                    return Err(Error::BranchAbsent(match self.mode {
                        Mode::Branch { branch, .. } => branch,
                        _ => Branch::Plus,
                    }));
                }
            };
            if !(slope > 0.0) {
                return Ok(finish(StopReason::Stalled, u, eval, trace));
            }
            let dnorm = dot(&direction, &direction).sqrt();
            let unorm = dot(u.values(), u.values()).sqrt();

            let mut accepted = None;
            let mut guarded = false;
            while tau * dnorm > 1e-15 * unorm {
                let moved: Vec<f64> =
                    u.values().iter().zip(&direction).map(|(v, d)| v + sign * tau * d).collect();
                let candidate = Field::new(*u.grid(), moved)?.normalize(params.c)?;
                match self.objective(&candidate)? {
                    TrialOutcome::Ok(t) => {
                        let gain = sign * (t.value - current);
                        if gain >= cfg.armijo * tau * slope {
                            accepted = Some(t);
                            break;
                        }
                    }
                    TrialOutcome::Reject { guard } => guarded |= guard,
                }
                tau *= cfg.backtrack;
            }
            let Some(trial) = accepted else {
                let stop = if guarded { StopReason::GuardFloor } else { StopReason::Stalled };
                return Ok(finish(stop, u, eval, trace));
            };
            let next = self.settle(trial)?;
            let fraction = next.boundary_mass_fraction()?;
            if fraction > SOLVE_BOUNDARY_LIMIT {
                return Err(Error::BoundaryLeak { fraction, limit: SOLVE_BOUNDARY_LIMIT });
            }
            u = next;
            tau /= cfg.backtrack;
            iter += 1;
        }
    }

    /// Preconditioned gradient, projected to be L²-orthogonal to `u` (and to
    /// `∇Q` in branch modes).
    fn direction(&self, u: &Field, eval: &Evaluation, lambda: f64) -> Result<Vec<f64>> {
        let spectral = self.ev.spectral();
        let e = &eval.breakdown;
        // The shift must dominate γw + λ everywhere, otherwise steps that suit
        // the core amplify the far-field tail where the log potential is large.
        let far = eval.potential.iter().map(|w| self.params.gamma * w).fold(f64::NEG_INFINITY, f64::max) + lambda;
        let shift = lambda.abs().max(e.kinetic / e.mass).max(far).max(1e-3);
        let pg = spectral.resolvent(&eval.gradient, shift);
        let mut basis = vec![u.values().to_vec()];
        if let Mode::Branch { .. } = self.mode {
            let Params { a, p, .. } = self.params;
            let grad_q: Vec<f64> =
                eval.neg_laplacian.iter().zip(&eval.power).map(|(l, w)| 2.0 * l - a * (p - 2.0) * w).collect();
            basis.push(grad_q);
        }
        let pb: Vec<Vec<f64>> = basis.iter().map(|b| spectral.resolvent(b, shift)).collect();
        let k = basis.len();
        let mut gram = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            rhs[i] = dot(&basis[i], &pg);
            for j in 0..k {
                gram[i * k + j] = dot(&basis[i], &pb[j]);
            }
        }
        let coef = solve_small(&gram, &rhs, k);
        let mut d = pg;
        for (c, v) in coef.iter().zip(&pb) {
            for (di, vi) in d.iter_mut().zip(v) {
                *di -= c * vi;
            }
        }
        Ok(d)
    }
}

/// Solves a 1x1 or 2x2 symmetric system, dropping a nearly dependent second row.
fn solve_small(g: &[f64], r: &[f64], k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![r[0] / g[0]];
    }
    let det = g[0] * g[3] - g[1] * g[2];
    if det.abs() <= 1e-12 * g[0].abs() * g[3].abs() {
        return vec![r[0] / g[0], 0.0];
    }
    vec![(g[3] * r[0] - g[1] * r[1]) / det, (g[0] * r[1] - g[2] * r[0]) / det]
}
