//! Analytic fiber maps `g(t) = F(u^t)` built from the scalar invariants of `u`.

use serde::{Deserialize, Serialize};

use crate::error::{Branch, Error, Result};
use crate::functionals::Evaluator;
use crate::grid::Field;
use crate::params::Params;

/// Relative mass tolerance accepted by [`scalars`].
pub const MASS_TOLERANCE: f64 = 1e-8;

/// `(A, C, V)` of a field on `S(c)` together with the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberScalars {
    #[serde(rename = "A")]
    pub kinetic: f64,
    #[serde(rename = "C")]
    pub pnorm: f64,
    #[serde(rename = "V")]
    pub interaction: f64,
    pub params: Params,
}

/// Critical point of a fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub s: f64,
    pub branch: Branch,
    pub g: f64,
    pub gpp: f64,
}

/// Diagnostics for membership in the projectable set (`γ < 0`, `a > 0`, `p < 4`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub inside: bool,
    pub t_star: f64,
    /// `(t*)² A - k₀`
    pub margin: f64,
    /// `Q(u^{t*})`
    pub q_at_t_star: f64,
}

/// Computes the fiber scalars of `u`, which must carry mass `params.c`.
pub fn scalars(ev: &Evaluator, u: &Field, params: &Params) -> Result<FiberScalars> {
    params.validate()?;
    let m = u.mass();
    if (m - params.c).abs() > MASS_TOLERANCE * params.c {
        return Err(Error::MassMismatch { expected: params.c, actual: m });
    }
    let e = ev.energy(u, params)?;
    FiberScalars::new(e.kinetic, e.pnorm, e.interaction, *params)
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDilation(t))
    }
}

impl FiberScalars {
    pub fn new(kinetic: f64, pnorm: f64, interaction: f64, params: Params) -> Result<Self> {
        params.validate()?;
        if !(kinetic > 0.0 && kinetic.is_finite()) {
            return Err(Error::DegenerateScalars(format!("A must be positive, got {kinetic}")));
        }
        if !(pnorm > 0.0 && pnorm.is_finite()) {
            return Err(Error::DegenerateScalars(format!("C must be positive, got {pnorm}")));
        }
        if !interaction.is_finite() {
            return Err(Error::DegenerateScalars("V must be finite".into()));
        }
        Ok(FiberScalars { kinetic, pnorm, interaction, params })
    }

    /// `a (p-2)/p`
    fn beta(&self) -> f64 {
        self.params.a * (self.params.p - 2.0) / self.params.p
    }

    /// `γ c² / 4`
    fn kappa(&self) -> f64 {
        0.25 * self.params.gamma * self.params.c * self.params.c
    }

    /// Scale used for relative root tolerances: `A + |γ| c²/4`.
    pub fn scale(&self) -> f64 {
        self.kinetic + self.kappa().abs()
    }

    fn g_raw(&self, t: f64) -> f64 {
        let Params { gamma, a, p, c } = self.params;
        0.5 * t * t * self.kinetic + 0.25 * gamma * (self.interaction - c * c * t.ln())
            - a / p * t.powf(p - 2.0) * self.pnorm
    }

    fn phi_raw(&self, t: f64) -> f64 {
        t * t * self.kinetic - self.beta() * t.powf(self.params.p - 2.0) * self.pnorm - self.kappa()
    }

    fn dphi_raw(&self, t: f64) -> f64 {
        let p = self.params.p;
        2.0 * t * self.kinetic - self.beta() * (p - 2.0) * t.powf(p - 3.0) * self.pnorm
    }

    /// `F(u^t)`
    pub fn g(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.g_raw(t))
    }

    /// `Q(u^t) = t g'(t)`
    pub fn phi(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.phi_raw(t))
    }

    pub fn dg(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.phi_raw(t) / t)
    }

    pub fn ddg(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.dphi_raw(t) / t - self.phi_raw(t) / (t * t))
    }

    /// Unique `t` with `2 A(u^t) = a (p-2)²/p C(u^t)`.
    pub fn t_star(&self) -> Result<f64> {
        let Params { a, p, .. } = self.params;
        if a <= 0.0 {
            return Err(Error::WrongRegime(format!("t* needs a > 0, got a = {a}")));
        }
        if p == 4.0 {
            return Err(Error::WrongRegime("t* is undefined at p = 4".into()));
        }
        let ratio = 2.0 * p * self.kinetic / (a * (p - 2.0) * (p - 2.0) * self.pnorm);
        Ok(ratio.powf(1.0 / (p - 4.0)))
    }

    /// `k₀ = (p-2)|γ|c² / (4|p-4|)`.
    pub fn k0(&self) -> Result<f64> {
        crate::constants::k0(&self.params)
    }

    /// Membership in the projectable set: `(t*)² A > k₀`.
    pub fn in_v(&self) -> Result<Membership> {
        let Params { gamma, a, p, .. } = self.params;
        if !(gamma < 0.0 && a > 0.0 && p < 4.0) {
            return Err(Error::WrongRegime(format!(
                "membership test needs gamma < 0, a > 0, p < 4 (got gamma={gamma}, a={a}, p={p})"
            )));
        }
        let t_star = self.t_star()?;
        let margin = t_star * t_star * self.kinetic - self.k0()?;
        Ok(Membership { inside: margin > 0.0, t_star, margin, q_at_t_star: self.phi_raw(t_star) })
    }

    /// The fiber's critical points with a sign change of `g'`, in increasing order.
    pub fn critical_points(&self) -> Result<Vec<BranchPoint>> {
        let Params { a, p, .. } = self.params;
        let kappa = self.kappa();
        let mut roots = Vec::new();
        if a <= 0.0 {
            // φ is strictly increasing from -κ to +∞
            if kappa > 0.0 {
                roots.push(self.bracket_outward(1.0, true)?);
            }
        } else if p == 4.0 {
            let lead = self.kinetic - self.beta() * self.pnorm;
            if lead != 0.0 && kappa != 0.0 && lead.signum() == kappa.signum() {
                roots.push((kappa / lead).sqrt());
            }
        } else {
            let ts = self.t_star()?;
            let extreme = self.phi_raw(ts);
            let near_zero = -kappa;
            if p > 4.0 && extreme > 0.0 {
                if near_zero < 0.0 {
                    roots.push(self.solve_between(self.bracket_inward(ts)?, ts)?);
                }
                roots.push(self.solve_between(ts, self.bracket_upward(ts)?)?);
            } else if p < 4.0 && extreme < 0.0 {
                if near_zero > 0.0 {
                    roots.push(self.solve_between(self.bracket_inward(ts)?, ts)?);
                }
                roots.push(self.solve_between(ts, self.bracket_upward(ts)?)?);
            }
        }
        roots
            .into_iter()
            .map(|s| {
                let gpp = self.dphi_raw(s) / s - self.phi_raw(s) / (s * s);
                let branch = if gpp > 0.0 {
                    Branch::Plus
                } else if gpp < 0.0 {
                    Branch::Minus
                } else {
                    Branch::Zero
                };
                Ok(BranchPoint { s, branch, g: self.g_raw(s), gpp })
            })
            .collect()
    }

    /// The requested branch point, if present.
    pub fn branch_point(&self, branch: Branch) -> Result<BranchPoint> {
        self.critical_points()?
            .into_iter()
            .find(|bp| bp.branch == branch)
            .ok_or(Error::BranchAbsent(branch))
    }

    /// A degenerate critical point (`g' = g'' = 0`) at `t*`, when `|φ(t*)|` is
    /// within `rel_tol` of the scale.
    pub fn degenerate_point(&self, rel_tol: f64) -> Result<Option<f64>> {
        let ts = self.t_star()?;
        Ok((self.phi_raw(ts).abs() <= rel_tol * self.scale()).then_some(ts))
    }

    /// Lower bracket end on `(0, t*)` where `φ` has the sign of `φ(0+)`.
    fn bracket_inward(&self, ts: f64) -> Result<f64> {
        let target = -self.kappa().signum();
        let mut t = ts;
        for _ in 0..1000 {
            t *= 0.5;
            if self.phi_raw(t).signum() == target {
                return Ok(t);
            }
        }
        Err(Error::Bracketing(format!("no sign change of phi below t* = {ts}")))
    }

    /// Upper bracket end on `(t*, 10⁶ t*]`.
    fn bracket_upward(&self, ts: f64) -> Result<f64> {
        let inner = self.phi_raw(ts).signum();
        let mut t = ts;
        while t < 1e6 * ts {
            t = (2.0 * t).min(1e6 * ts);
            if self.phi_raw(t).signum() == -inner {
                return Ok(t);
            }
        }
        Err(Error::Bracketing(format!("no sign change of phi within 1e6 * t* = {}", 1e6 * ts)))
    }

    /// Root of a monotone `φ` by expanding around `t0`.
    fn bracket_outward(&self, t0: f64, increasing: bool) -> Result<f64> {
        let (mut lo, mut hi) = (t0, t0);
        let sign = if increasing { 1.0 } else { -1.0 };
        for _ in 0..2000 {
            if sign * self.phi_raw(lo) < 0.0 {
                break;
            }
            lo *= 0.5;
        }
        for _ in 0..2000 {
            if sign * self.phi_raw(hi) > 0.0 {
                break;
            }
            hi *= 2.0;
        }
        if sign * self.phi_raw(lo) >= 0.0 || sign * self.phi_raw(hi) <= 0.0 || !hi.is_finite() {
            return Err(Error::Bracketing("monotone fiber has no bracketable root".into()));
        }
        self.solve_between(lo, hi)
    }

    /// Bisection to relative width 1e-8 followed by safeguarded Newton polish.
    fn solve_between(&self, lo: f64, hi: f64) -> Result<f64> {
        let (mut lo, mut hi) = (lo, hi);
        let flo = self.phi_raw(lo);
        let fhi = self.phi_raw(hi);
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() == fhi.signum() {
            return Err(Error::Bracketing(format!("phi has equal signs at {lo} and {hi}")));
        }
        let lo_sign = flo.signum();
        let tol = 1e-12 * self.scale();
        let width = 1e-8 * hi;
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            if self.phi_raw(mid).signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..5 {
            let f = self.phi_raw(t);
            if f.abs() < tol {
                return Ok(t);
            }
            let next = t - f / self.dphi_raw(t);
            if !(next > lo && next < hi) {
                break;
            }
            t = next;
        }
        // fall back to plain bisection down to rounding
        while self.phi_raw(t).abs() >= tol {
            if self.phi_raw(t).signum() == lo_sign {
                lo = t;
            } else {
                hi = t;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            t = mid;
        }
        Ok(t)
    }

    /// `(t, g, g', g'', φ)` on `samples` log-spaced points in `[t_min, t_max]`.
    pub fn curve(&self, t_min: f64, t_max: f64, samples: usize) -> Result<Vec<[f64; 5]>> {
        check_t(t_min)?;
        check_t(t_max)?;
        if t_max <= t_min || samples < 2 {
            return Err(Error::InvalidParameter("fiber range needs t_min < t_max and at least 2 samples".into()));
        }
        let (l0, l1) = (t_min.ln(), t_max.ln());
        (0..samples)
            .map(|k| {
                let t = (l0 + (l1 - l0) * k as f64 / (samples - 1) as f64).exp();
                Ok([t, self.g(t)?, self.dg(t)?, self.ddg(t)?, self.phi(t)?])
            })
            .collect()
    }
}

/// Result of projecting a field onto one branch of the Pohozaev set.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: Field,
    pub point: BranchPoint,
}

/// Materializes `u^s` for the requested branch point `s` of `u`'s fiber.
pub fn project_to_lambda(ev: &Evaluator, u: &Field, params: &Params, branch: Branch) -> Result<Projection> {
    let sc = scalars(ev, u, params)?;
    let point = sc.branch_point(branch)?;
    let field = if (point.s - 1.0).abs() < 1e-10 { u.clone() } else { u.dilate(point.s)?.normalize(params.c)? };
    Ok(Projection { field, point })
}
