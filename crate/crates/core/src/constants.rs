//! Sharp constants and the closed-form thresholds built from them.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Evaluator;
use crate::grid::Grid;
use crate::params::Params;
use crate::profile::{discretize, ProfileSpec, TwoBump};
use crate::radial;

/// Relative agreement demanded between shooting and the mixture ascent.
pub const RAYLEIGH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    OdeShooting,
    RayleighOptimization,
    EmpiricalFamily,
}

/// Gagliardo–Nirenberg constant with its cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnEstimate {
    pub p: f64,
    pub kgn: f64,
    /// Best Gaussian-mixture quotient found by direct ascent.
    pub rayleigh: f64,
    /// Single-Gaussian quotient.
    pub gaussian: f64,
    pub phi0: f64,
    pub ground_state_mass: f64,
    pub method: Provenance,
    pub tolerance: f64,
}

/// Sharp constants used for classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpConstants {
    pub p: f64,
    pub kgn: f64,
    pub kgn_method: Provenance,
    pub kv2: Option<f64>,
}

impl SharpConstants {
    /// Only the GN constant, for callers that need no V₂ bound.
    pub fn with_kgn(p: f64, kgn: f64) -> Self {
        SharpConstants { p, kgn, kgn_method: Provenance::OdeShooting, kv2: None }
    }

    pub fn estimate(p: f64) -> Result<Self> {
        Ok(Self::with_kgn(p, kgn_cached(p)?.kgn))
    }
}

/// Best constant `K` in `C(u) ≤ K A(u)^{p/2-1} ‖u‖₂²` from the radial ground state.
pub fn kgn_estimate(p: f64) -> Result<GnEstimate> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("kgn needs 2 < p < inf, got {p}")));
    }
    let gs = radial::ground_state(p)?;
    let kgn = gs.gn_quotient();
    let (rayleigh, _) = radial::mixture_ascent(p);
    if rayleigh > kgn * (1.0 + RAYLEIGH_TOLERANCE) {
        return Err(Error::Shooting(format!(
            "mixture quotient {rayleigh} exceeds shooting value {kgn} at p = {p}"
        )));
    }
    Ok(GnEstimate {
        p,
        kgn,
        rayleigh,
        gaussian: radial::gaussian_quotient(p),
        phi0: gs.phi0,
        ground_state_mass: gs.mass,
        method: Provenance::OdeShooting,
        tolerance: RAYLEIGH_TOLERANCE,
    })
}

/// [`kgn_estimate`] memoized per exponent; the estimate is deterministic.
pub fn kgn_cached(p: f64) -> Result<GnEstimate> {
    static CACHE: OnceLock<Mutex<HashMap<u64, GnEstimate>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(e) = cache.lock().unwrap().get(&p.to_bits()) {
        return Ok(*e);
    }
    let e = kgn_estimate(p)?;
    cache.lock().unwrap().insert(p.to_bits(), e);
    Ok(e)
}

/// `k₀ = (p-2)|γ|c² / (4|p-4|)`.
pub fn k0(params: &Params) -> Result<f64> {
    let Params { gamma, p, c, .. } = *params;
    if p == 4.0 {
        return Err(Error::WrongRegime("k0 is undefined at p = 4".into()));
    }
    if gamma == 0.0 {
        return Err(Error::WrongRegime("k0 is undefined for gamma = 0".into()));
    }
    Ok((p - 2.0) * gamma.abs() * c * c / (4.0 * (p - 4.0).abs()))
}

/// Mass threshold `c₀` for `p > 4`, `a > 0`, `γ > 0`.
pub fn c0(p: f64, a: f64, gamma: f64, kgn: f64) -> Result<f64> {
    if !(p > 4.0 && a > 0.0 && gamma > 0.0 && kgn > 0.0) {
        return Err(Error::WrongRegime(format!(
            "c0 needs p > 4, a > 0, gamma > 0, kgn > 0 (got p={p}, a={a}, gamma={gamma}, kgn={kgn})"
        )));
    }
    let inner = p * (p - 4.0).powf(0.5 * (p - 4.0)) / (p - 2.0).powf(0.5 * p) / (a * gamma.powf(0.5 * (p - 4.0)) * kgn);
    Ok(2.0 * inner.powf(1.0 / (p - 3.0)))
}

fn check_subcritical(p: f64, kgn: f64) -> Result<()> {
    if !(p > 2.0 && p < 4.0 && kgn > 0.0) {
        return Err(Error::WrongRegime(format!("K1/K2 need 2 < p < 4 and kgn > 0 (got p={p}, kgn={kgn})")));
    }
    Ok(())
}

/// `K₁ = 2^{-(4-p)/2} K⁻¹ p / (2^{3-p} (p-2)^{p/2} (4-p)^{(4-p)/2})`.
pub fn k1(p: f64, kgn: f64) -> Result<f64> {
    check_subcritical(p, kgn)?;
    let q = 4.0 - p;
    Ok(2f64.powf(-0.5 * q) / kgn * p / (2f64.powf(3.0 - p) * (p - 2.0).powf(0.5 * p) * q.powf(0.5 * q)))
}

/// `K₂ = 2^{(4-p)/2} K₁`.
pub fn k2(p: f64, kgn: f64) -> Result<f64> {
    Ok(2f64.powf(0.5 * (4.0 - p)) * k1(p, kgn)?)
}

/// `|γ|^{(4-p)/2} c^{3-p}`, the factor turning `K₁`, `K₂` into thresholds on `a`.
pub fn threshold_factor(gamma: f64, p: f64, c: f64) -> f64 {
    gamma.abs().powf(0.5 * (4.0 - p)) * c.powf(3.0 - p)
}

/// Mass-critical bound `2 / (a K)` at `p = 4`.
pub fn mass_critical_bound(a: f64, kgn: f64) -> Result<f64> {
    if !(a > 0.0 && kgn > 0.0) {
        return Err(Error::WrongRegime(format!("mass-critical bound needs a > 0, got a = {a}")));
    }
    Ok(2.0 / (a * kgn))
}

/// Masses `c_i` where `a = K_i |γ|^{(4-p)/2} c^{3-p}`, for `p ≠ 3`.
pub fn band_edges(p: f64, a: f64, gamma: f64, kgn: f64) -> Result<(f64, f64)> {
    if p == 3.0 {
        return Err(Error::WrongRegime("band edges do not depend on c at p = 3".into()));
    }
    if !(a > 0.0 && gamma != 0.0) {
        return Err(Error::WrongRegime("band edges need a > 0 and gamma != 0".into()));
    }
    let e = 1.0 / (p - 3.0);
    let g = gamma.abs().powf(0.5 * (4.0 - p) * e);
    Ok(((k1(p, kgn)? / a).powf(e) * g, (k2(p, kgn)? / a).powf(e) * g))
}

/// The fixed family of profiles behind [`kv2_estimate`].
pub fn kv2_family() -> Vec<ProfileSpec> {
    let mut family = Vec::with_capacity(50);
    for k in 0..14 {
        family.push(ProfileSpec::gaussian(0.5 + 0.2 * k as f64, 1.0 + 0.25 * (k % 4) as f64));
    }
    for k in 0..14 {
        let r0 = 0.5 + 0.5 * (k / 2) as f64;
        let sigma = if k % 2 == 0 { 0.5 } else { 0.9 };
        family.push(ProfileSpec::ring(r0, sigma, 1.0));
    }
    for k in 0..12 {
        let tb = TwoBump {
            separation: 2.5 + 0.5 * (k % 3) as f64,
            scale: 1.0 + 0.25 * (k / 3) as f64,
            radius: 1.0,
            tail_radius: Some(0.8 + 0.1 * (k % 3) as f64),
            tail_fraction: 0.3 + 0.05 * (k % 4) as f64,
        };
        family.push(ProfileSpec::two_bump(tb, 1.0));
    }
    for k in 0..10 {
        family.push(ProfileSpec::random_smooth(1000 + k, 1.0 + 0.2 * k as f64, 1.0));
    }
    family
}

/// `|V₂(u)| / (√A(u) mass(u)^{3/2})` for each profile of [`kv2_family`].
pub fn kv2_ratios(grid: &Grid) -> Result<Vec<f64>> {
    let ev = Evaluator::new(grid);
    kv2_family()
        .iter()
        .map(|spec| {
            let u = discretize(spec, grid)?;
            let a = ev.kinetic(&u)?;
            let (_, _, v2) = ev.interaction(&u)?;
            Ok(v2.abs() / (a.sqrt() * u.mass().powf(1.5)))
        })
        .collect()
}

/// Empirical lower bound for the constant in `|V₂(u)| ≤ K √A(u) c^{3/2}`.
pub fn kv2_estimate() -> Result<f64> {
    static CACHE: OnceLock<f64> = OnceLock::new();
    if let Some(k) = CACHE.get() {
        return Ok(*k);
    }
    let grid = Grid::new(256, 40.0)?;
    let k = kv2_ratios(&grid)?.into_iter().fold(0.0, f64::max);
    Ok(*CACHE.get_or_init(|| k))
}
