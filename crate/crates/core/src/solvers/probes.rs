//! Verification probes: the two-bump sequence along which `F` diverges on the
//! Pohozaev set, and the mass-critical dilation ray.

use serde::{Deserialize, Serialize};

use crate::constants::{self, SharpConstants};
use crate::error::{Error, Result};
use crate::fiber::FiberScalars;
use crate::functionals::{self, Evaluator};
use crate::grid::{Field, Grid};
use crate::params::Params;
use crate::profile::{bump, two_bump_lobes, TwoBump};
use crate::radial;

/// Shape of the probe sequence; `scale` of the template is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBumpProbeConfig {
    pub template: TwoBump,
}

impl TwoBumpProbeConfig {
    /// Lobe radius minimizing the limiting `Q`, tail of the same radius
    /// carrying a tenth of the mass, separation 1.2 times the sum of radii.
    pub fn tuned(params: &Params) -> Self {
        let eta = 0.1;
        let Params { a, p, c, .. } = *params;
        let (alpha, kappa) = bump_constants(p);
        let m = (1.0 - eta) * c;
        let beta = a * (p - 2.0) / p;
        let rho = (2.0 * alpha / (beta * (p - 2.0) * m.powf(0.5 * p - 1.0) * kappa)).powf(1.0 / (4.0 - p));
        TwoBumpProbeConfig {
            template: TwoBump {
                separation: 2.4 * rho,
                scale: 1.0,
                radius: rho,
                tail_radius: Some(rho),
                tail_fraction: eta,
            },
        }
    }

    /// Half-width of the region occupied by the sequence member with scale `n`.
    pub fn half_extent(&self, n: f64) -> f64 {
        let t = &self.template;
        0.5 * (t.radius + n * (t.separation + t.tail_radius()))
    }
}

/// `A` and `C` of the unit-mass bump of radius 1: `A(b_ρ) = α/ρ²`,
/// `C(b_ρ) = κ / ρ^{p-2}` at unit mass.
fn bump_constants(p: f64) -> (f64, f64) {
    let n = 20001;
    let h = 1.0 / (n - 1) as f64;
    let mut m = 0.0;
    let mut a = 0.0;
    let mut c = 0.0;
    for i in 1..n - 1 {
        let r = i as f64 * h;
        let b = bump(r, 1.0);
        let db = -2.0 * r / (1.0 - r * r).powi(2) * b;
        m += b * b * r;
        a += db * db * r;
        c += b.powf(p) * r;
    }
    let tau = std::f64::consts::TAU * h;
    let (m, a, c) = (m * tau, a * tau, c * tau);
    (a / m, c / m.powf(0.5 * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "F")]
    pub energy: f64,
    /// `Q` assembled from the separately evaluated lobes.
    pub q_disjoint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBumpProbe {
    pub rows: Vec<ProbeRow>,
    /// `A(u) - a (p-2)/p C(u) + |γ| c²/4` for the first lobe alone.
    pub q_limit: f64,
    pub config: TwoBumpProbeConfig,
}

impl TwoBumpProbe {
    pub fn energy_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].energy < w[0].energy)
    }
}

/// Evaluates `Q` and `F` along `u_n = u + (1/n) v((x - nR)/n)` for each `n`.
pub fn two_bump_probe(params: &Params, grid: &Grid, n_list: &[f64], config: &TwoBumpProbeConfig) -> Result<TwoBumpProbe> {
    params.validate()?;
    let Params { gamma, a, p, c } = *params;
    if !(gamma < 0.0 && p < 4.0) {
        return Err(Error::WrongRegime(format!("two-bump probe needs gamma < 0 and p < 4 (got gamma={gamma}, p={p})")));
    }
    let sharp = SharpConstants::estimate(p)?;
    let threshold = constants::k1(p, sharp.kgn)? * constants::threshold_factor(gamma, p, c);
    if a <= threshold {
        return Err(Error::WrongRegime(format!("two-bump probe needs a > K1 threshold {threshold}, got a = {a}")));
    }
    let ev = Evaluator::new(grid);
    let beta = a * (p - 2.0) / p;
    let kappa = 0.25 * gamma.abs() * c * c;
    let mut rows = Vec::with_capacity(n_list.len());
    let mut q_limit = f64::NAN;
    for &n in n_list {
        let tb = TwoBump { scale: n, ..config.template };
        let (u, v) = two_bump_lobes(&tb, c, grid)?;
        let lobe_a = [ev.kinetic(&u)?, ev.kinetic(&v)?];
        let lobe_c = [ev.pnorm(&u, p)?, ev.pnorm(&v, p)?];
        q_limit = lobe_a[0] - beta * lobe_c[0] + kappa;
        let q_disjoint = lobe_a[0] + lobe_a[1] - beta * (lobe_c[0] + lobe_c[1]) + kappa;
        let sum: Vec<f64> = u.values().iter().zip(v.values()).map(|(x, y)| x + y).collect();
        let field = Field::new(*grid, sum)?;
        let e = ev.energy(&field, params)?;
        rows.push(ProbeRow { n, q: functionals::pohozaev_q(&e, params), energy: e.energy, q_disjoint });
    }
    Ok(TwoBumpProbe { rows, q_limit, config: *config })
}

/// Fiber values along the dilation ray of a GN-optimal profile at `p = 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCriticalProbe {
    pub threshold: f64,
    pub kgn: f64,
    pub scalars: FiberScalars,
    /// `A/2 - (a/4) C`, the coefficient of `t²` in `F(u^t)`.
    pub lead: f64,
    /// `(k, t = 2^k, F(u^t))`
    pub ray: Vec<(i32, f64, f64)>,
    pub unbounded_below: bool,
    /// Minimizer of `t ↦ F(u^t)` when bounded below.
    pub t_min: Option<f64>,
}

/// Samples the Townes profile at mass `params.c` and evaluates `F(u^{2^k})`
/// analytically for `k = -6..=12`.
pub fn masscritical_probe(params: &Params, grid: &Grid) -> Result<MassCriticalProbe> {
    params.validate()?;
    let Params { gamma, a, p, c } = *params;
    if !(p == 4.0 && gamma > 0.0 && a > 0.0) {
        return Err(Error::WrongRegime(format!("mass-critical probe needs p = 4, gamma > 0, a > 0 (got p={p})")));
    }
    let gn = constants::kgn_cached(4.0)?;
    let threshold = constants::mass_critical_bound(a, gn.kgn)?;
    let gs = radial::ground_state(4.0)?;
    let amp = (c / gs.mass).sqrt();
    let u = Field::from_fn(*grid, |x, y| amp * gs.value(x.hypot(y)))?.normalize(c)?;
    u.check_boundary(crate::grid::BOUNDARY_LIMIT)?;
    let ev = Evaluator::new(grid);
    let sc = crate::fiber::scalars(&ev, &u, params)?;
    let lead = 0.5 * sc.kinetic - 0.25 * a * sc.pnorm;
    let ray = (-6..=12)
        .map(|k| {
            let t = 2f64.powi(k);
            Ok((k, t, sc.g(t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let unbounded_below = lead < 0.0;
    let t_min = (!unbounded_below).then(|| (gamma * c * c / (8.0 * lead)).sqrt());
    Ok(MassCriticalProbe { threshold, kgn: gn.kgn, scalars: sc, lead, ray, unbounded_below, t_min })
}
