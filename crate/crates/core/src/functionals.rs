//! Energy functional, its pieces, its L² gradient and the Pohozaev quantities.

use serde::{Deserialize, Serialize};

use crate::convolution::{Convolver, Kernel, OriginRule};
use crate::error::{Error, Result};
use crate::grid::{dot, Field, Grid};
use crate::params::Params;
use crate::spectral::Spectral;

/// All integral invariants of a field for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    #[serde(rename = "A")]
    pub kinetic: f64,
    #[serde(rename = "C")]
    pub pnorm: f64,
    #[serde(rename = "V")]
    pub interaction: f64,
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    #[serde(rename = "F")]
    pub energy: f64,
    pub star_norm: f64,
    pub mass: f64,
}

/// Pointwise pieces needed by the gradient flows.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub breakdown: EnergyBreakdown,
    /// `-Δu`
    pub neg_laplacian: Vec<f64>,
    /// `w = log|·| * u²`
    pub potential: Vec<f64>,
    /// `|u|^{p-2} u`
    pub power: Vec<f64>,
    /// `-Δu + γ w u - a |u|^{p-2} u`
    pub gradient: Vec<f64>,
}

/// Owns the transform plans for one grid; every functional goes through here.
#[derive(Clone)]
pub struct Evaluator {
    grid: Grid,
    spectral: Spectral,
    conv: Convolver,
}

impl Evaluator {
    pub fn new(grid: &Grid) -> Self {
        Self::with_rule(grid, OriginRule::default())
    }

    pub fn with_rule(grid: &Grid, rule: OriginRule) -> Self {
        Evaluator { grid: *grid, spectral: Spectral::new(grid), conv: Convolver::new(grid, rule) }
    }

    pub fn with_convolver(conv: Convolver) -> Self {
        let grid = *conv.grid();
        Evaluator { grid, spectral: Spectral::new(&grid), conv }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    fn check(&self, u: &Field) -> Result<()> {
        if u.grid().same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn kinetic(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        Ok(self.spectral.kinetic(u.values()))
    }

    pub fn pnorm(&self, u: &Field, p: f64) -> Result<f64> {
        self.check(u)?;
        Ok(pnorm_values(u.values(), p) * self.grid.cell_area())
    }

    pub fn star_norm(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        let s: f64 = u
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let (x, y) = self.grid.point(k);
                x.hypot(y).ln_1p() * v * v
            })
            .sum();
        Ok(s * self.grid.cell_area())
    }

    fn density(u: &Field) -> Vec<f64> {
        u.values().iter().map(|v| v * v).collect()
    }

    /// `w = log|·| * u²` on the grid.
    pub fn log_potential(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let hat = self.conv.density_spectrum(&Self::density(u));
        Field::new(self.grid, self.conv.potential(&hat, Kernel::Log))
    }

    /// `(V, V1, V2)`.
    pub fn interaction(&self, u: &Field) -> Result<(f64, f64, f64)> {
        self.check(u)?;
        let hat = self.conv.density_spectrum(&Self::density(u));
        Ok((
            self.conv.pair_energy(&hat, Kernel::Log),
            self.conv.pair_energy(&hat, Kernel::LogOnePlus),
            self.conv.pair_energy(&hat, Kernel::LogOnePlusInv),
        ))
    }

    pub fn v_total(&self, u: &Field) -> Result<f64> {
        Ok(self.interaction(u)?.0)
    }

    pub fn energy(&self, u: &Field, params: &Params) -> Result<EnergyBreakdown> {
        let kinetic = self.kinetic(u)?;
        let pnorm = self.pnorm(u, params.p)?;
        let (v, v1, v2) = self.interaction(u)?;
        Ok(assemble(params, kinetic, pnorm, (v, v1, v2), self.star_norm(u)?, u.mass()))
    }

    /// Full evaluation including the L² gradient.
    pub fn evaluate(&self, u: &Field, params: &Params) -> Result<Evaluation> {
        self.check(u)?;
        let values = u.values();
        let (neg_laplacian, kinetic) = self.spectral.neg_laplacian(values);
        let hat = self.conv.density_spectrum(&Self::density(u));
        let potential = self.conv.potential(&hat, Kernel::Log);
        let inter = (
            self.conv.pair_energy(&hat, Kernel::Log),
            self.conv.pair_energy(&hat, Kernel::LogOnePlus),
            self.conv.pair_energy(&hat, Kernel::LogOnePlusInv),
        );
        let power: Vec<f64> = values.iter().map(|v| v.abs().powf(params.p - 2.0) * v).collect();
        let pnorm = dot(values, &power) * self.grid.cell_area();
        let gradient = neg_laplacian
            .iter()
            .zip(&potential)
            .zip(&power)
            .zip(values)
            .map(|(((l, w), q), v)| l + params.gamma * w * v - params.a * q)
            .collect();
        let breakdown = assemble(params, kinetic, pnorm, inter, self.star_norm(u)?, u.mass());
        Ok(Evaluation { breakdown, neg_laplacian, potential, power, gradient })
    }

    /// L² gradient `-Δu + γ w u - a|u|^{p-2}u`.
    pub fn grad_energy(&self, u: &Field, params: &Params) -> Result<Field> {
        Field::new(self.grid, self.evaluate(u, params)?.gradient)
    }

    /// Lagrange multiplier `-(1/m)[A + γV - aC]` with `m` the actual mass.
    pub fn lagrange_multiplier(&self, u: &Field, params: &Params) -> Result<f64> {
        let m = u.mass();
        if m == 0.0 {
            return Err(Error::ZeroField);
        }
        let e = self.energy(u, params)?;
        Ok(multiplier(&e, params))
    }

    /// Relative L² norm of `-Δu + λu + γwu - a|u|^{p-2}u`.
    pub fn el_residual(&self, u: &Field, params: &Params, lambda: f64) -> Result<f64> {
        let ev = self.evaluate(u, params)?;
        Ok(el_residual_from(&ev, u.values(), params, lambda, self.grid.cell_area()))
    }
}

fn pnorm_values(values: &[f64], p: f64) -> f64 {
    values.iter().map(|v| v.abs().powf(p)).sum()
}

fn assemble(params: &Params, kinetic: f64, pnorm: f64, inter: (f64, f64, f64), star_norm: f64, mass: f64) -> EnergyBreakdown {
    let (interaction, v1, v2) = inter;
    let energy = 0.5 * kinetic + 0.25 * params.gamma * interaction - params.a / params.p * pnorm;
    EnergyBreakdown { kinetic, pnorm, interaction, v1, v2, energy, star_norm, mass }
}

/// `-(1/m)[A + γV - aC]`; zero for a zero field.
pub fn multiplier(e: &EnergyBreakdown, params: &Params) -> f64 {
    if e.mass == 0.0 {
        return 0.0;
    }
    -(e.kinetic + params.gamma * e.interaction - params.a * e.pnorm) / e.mass
}

/// `Q = A - a (p-2)/p C - γ c²/4` with `c` the prescribed mass.
pub fn pohozaev_q(e: &EnergyBreakdown, params: &Params) -> f64 {
    e.kinetic - params.a * (params.p - 2.0) / params.p * e.pnorm - 0.25 * params.gamma * params.c * params.c
}

/// Normalization scale for `Q`.
pub fn q_scale(e: &EnergyBreakdown, params: &Params) -> f64 {
    e.kinetic + 0.25 * params.gamma.abs() * params.c * params.c
}

/// Relative defect in the integral identity
/// `λ m + γ V + (γ/4) m² - (2a/p) C = 0`.
pub fn pohozaev_residual(e: &EnergyBreakdown, params: &Params, lambda: f64) -> f64 {
    let m = e.mass;
    let g = params.gamma;
    let num = lambda * m + g * e.interaction + 0.25 * g * m * m - 2.0 * params.a / params.p * e.pnorm;
    num.abs() / (1.0 + lambda.abs() * m + g.abs() * e.interaction.abs())
}

pub(crate) fn el_residual_from(ev: &Evaluation, u: &[f64], params: &Params, lambda: f64, area: f64) -> f64 {
    let mut defect = 0.0;
    let mut norms = [0.0; 4];
    for k in 0..u.len() {
        let lap = ev.neg_laplacian[k];
        let lin = lambda * u[k];
        let pot = params.gamma * ev.potential[k] * u[k];
        let pw = params.a * ev.power[k];
        let r = lap + lin + pot - pw;
        defect += r * r;
        norms[0] += lap * lap;
        norms[1] += lin * lin;
        norms[2] += pot * pot;
        norms[3] += pw * pw;
    }
    let scale: f64 = norms.iter().map(|s| (s * area).sqrt()).sum();
    (defect * area).sqrt() / (1.0 + scale)
}

// Convenience wrappers that build a one-off evaluator.

pub fn kinetic(u: &Field) -> Result<f64> {
    Evaluator::new(u.grid()).kinetic(u)
}

pub fn pnorm(u: &Field, p: f64) -> Result<f64> {
    Evaluator::new(u.grid()).pnorm(u, p)
}

pub fn energy(u: &Field, params: &Params) -> Result<EnergyBreakdown> {
    Evaluator::new(u.grid()).energy(u, params)
}
