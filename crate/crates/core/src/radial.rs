//! Radial ground state of `-Δφ + φ = φ^{p-1}` in the plane by shooting, and
//! radial Rayleigh quotients for Gaussian mixtures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STEP: f64 = 1e-3;
const R_MAX: f64 = 40.0;

/// Radial ground state sampled on a uniform radial mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub p: f64,
    pub phi0: f64,
    pub dr: f64,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// `∫ φ²`
    pub mass: f64,
    /// `∫ |∇φ|²`
    pub kinetic: f64,
    /// `∫ φ^p`
    pub pnorm: f64,
}

impl GroundState {
    /// `C / (A^{p/2-1} M)`.
    pub fn gn_quotient(&self) -> f64 {
        self.pnorm / (self.kinetic.powf(0.5 * self.p - 1.0) * self.mass)
    }

    /// Linear interpolation of the profile; zero past the last sample.
    pub fn value(&self, r: f64) -> f64 {
        let x = r / self.dr;
        let i = x.floor() as usize;
        if i + 1 >= self.phi.len() {
            return 0.0;
        }
        let s = x - i as f64;
        (1.0 - s) * self.phi[i] + s * self.phi[i + 1]
    }
}

#[derive(Debug, PartialEq)]
enum Outcome {
    /// φ crossed zero: initial value too large.
    Over,
    /// φ' turned positive while φ > 0: initial value too small.
    Under,
    /// Reached the end of the radial domain without either event.
    Neither,
}

fn rhs(p: f64, r: f64, y: [f64; 2]) -> [f64; 2] {
    let [f, df] = y;
    [df, -df / r + f - f.abs().powf(p - 2.0) * f]
}

/// Integrates from the origin, recording the trajectory when `record` is set.
fn shoot(p: f64, phi0: f64, mut record: Option<&mut (Vec<f64>, Vec<f64>)>) -> (Outcome, f64) {
    let h = STEP;
    // series start: φ(r) ≈ φ0 + (φ0 - φ0^{p-1}) r²/4
    let k = 0.25 * (phi0 - phi0.powf(p - 1.0));
    let mut r = h;
    let mut y = [phi0 + k * h * h, 2.0 * k * h];
    if let Some(rec) = record.as_deref_mut() {
        rec.0.push(phi0);
        rec.1.push(0.0);
        rec.0.push(y[0]);
        rec.1.push(y[1]);
    }
    while r < R_MAX {
        let k1 = rhs(p, r, y);
        let k2 = rhs(p, r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(p, r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(p, r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        r += h;
        if y[0] < 0.0 {
            return (Outcome::Over, r);
        }
        if y[1] > 0.0 {
            return (Outcome::Under, r);
        }
        if let Some(rec) = record.as_deref_mut() {
            rec.0.push(y[0]);
            rec.1.push(y[1]);
        }
    }
    (Outcome::Neither, r)
}

/// Shooting for the positive radial ground state.
pub fn ground_state(p: f64) -> Result<GroundState> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::Shooting(format!("exponent must exceed 2, got {p}")));
    }
    // φ0 ≤ 1 always undershoots; grow the upper end until it overshoots.
    let mut lo = 1.0;
    let mut hi = 2.0;
    let mut found = false;
    for _ in 0..60 {
        match shoot(p, hi, None).0 {
            Outcome::Over => {
                found = true;
                break;
            }
            _ => {
                lo = hi;
                hi *= 2.0;
            }
        }
    }
    if !found {
        return Err(Error::Shooting(format!("could not bracket the ground state for p = {p}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(p, mid, None).0 {
            Outcome::Over => hi = mid,
            Outcome::Under => lo = mid,
            Outcome::Neither => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    let phi0 = 0.5 * (lo + hi);
    let mut rec = (Vec::new(), Vec::new());
    shoot(p, phi0, Some(&mut rec));
    let (phi, dphi) = rec;
    if phi.len() < 1000 {
        return Err(Error::Shooting(format!("trajectory for p = {p} too short to resolve the tail")));
    }
    let tail = phi[phi.len() - 1];
    if tail > 1e-4 * phi0 {
        return Err(Error::Shooting(format!("ground state tail not resolved (phi = {tail:.2e})")));
    }
    let radial = |f: &dyn Fn(usize) -> f64| 2.0 * PI * simpson(phi.len(), STEP, |i| f(i) * i as f64 * STEP);
    let mass = radial(&|i| phi[i] * phi[i]);
    let kinetic = radial(&|i| dphi[i] * dphi[i]);
    let pnorm = radial(&|i| phi[i].powf(p));
    Ok(GroundState { p, phi0, dr: STEP, phi, dphi, mass, kinetic, pnorm })
}

/// Composite Simpson rule over `len` uniformly spaced samples (trapezoid on a
/// leftover interval).
fn simpson(len: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    if len < 2 {
        return 0.0;
    }
    let intervals = len - 1;
    let even = intervals - intervals % 2;
    let mut s = f(0) + f(even);
    for i in 1..even {
        s += if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) };
    }
    let mut total = s * h / 3.0;
    if even < intervals {
        total += 0.5 * h * (f(even) + f(intervals));
    }
    total
}

/// Radial profile `Σ w_j exp(-α_j r²)` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub weights: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl GaussianMixture {
    /// Exact `∫ u²`.
    pub fn mass(&self) -> f64 {
        self.pairs(|wi, wj, ai, aj| wi * wj * PI / (ai + aj))
    }

    /// Exact `∫ |∇u|²`.
    pub fn kinetic(&self) -> f64 {
        self.pairs(|wi, wj, ai, aj| 4.0 * ai * aj * wi * wj * PI / ((ai + aj) * (ai + aj)))
    }

    fn pairs(&self, f: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (wi, ai) in self.weights.iter().zip(&self.alphas) {
            for (wj, aj) in self.weights.iter().zip(&self.alphas) {
                s += f(*wi, *wj, *ai, *aj);
            }
        }
        s
    }

    /// `∫ |u|^p` by radial Simpson quadrature.
    pub fn pnorm(&self, p: f64) -> f64 {
        let amin = self.alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        let r_max = (60.0 / amin).sqrt();
        let n = 4001;
        let h = r_max / (n - 1) as f64;
        2.0 * PI
            * simpson(n, h, |i| {
                let r = i as f64 * h;
                let u: f64 = self.weights.iter().zip(&self.alphas).map(|(w, a)| w * (-a * r * r).exp()).sum();
                u.abs().powf(p) * r
            })
    }

    pub fn gn_quotient(&self, p: f64) -> f64 {
        self.pnorm(p) / (self.kinetic().powf(0.5 * p - 1.0) * self.mass())
    }
}

/// `2 / (p π^{p/2 - 1})`, the quotient of a single Gaussian.
pub fn gaussian_quotient(p: f64) -> f64 {
    2.0 / (p * PI.powf(0.5 * p - 1.0))
}

/// Maximizes the GN quotient over three-term Gaussian mixtures by compass search.
pub fn mixture_ascent(p: f64) -> (f64, GaussianMixture) {
    // x = (log w1, log w2, log α1, log α2); the first term is fixed at w=1, α=1/2
    let build = |x: &[f64; 4]| GaussianMixture {
        weights: vec![1.0, x[0].exp(), x[1].exp()],
        alphas: vec![0.5, x[2].exp(), x[3].exp()],
    };
    let score = |x: &[f64; 4]| build(x).gn_quotient(p);
    let mut x = [-1.0, -2.0, (0.5f64).ln() + 1.0, (0.5f64).ln() - 1.0];
    let mut best = score(&x);
    let mut step = 0.5;
    while step > 1e-5 {
        let mut improved = false;
        for d in 0..4 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[d] += sign * step;
                let s = score(&y);
                if s > best {
                    best = s;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, build(&x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn townes_mass_and_constant() {
        let gs = ground_state(4.0).unwrap();
        assert!((gs.phi0 - 2.206_2).abs() < 1e-3, "{}", gs.phi0);
        assert!((gs.mass - 11.700_9).abs() < 1e-3, "{}", gs.mass);
        assert!((gs.gn_quotient() - 2.0 / gs.mass).abs() < 1e-5);
    }

    #[test]
    fn pohozaev_identities_hold() {
        // C = p M / 2 and A = (p/2 - 1) M for the ground state
        for p in [2.5, 3.0, 3.5, 6.0] {
            let gs = ground_state(p).unwrap();
            assert!((gs.pnorm - 0.5 * p * gs.mass).abs() < 1e-5 * gs.pnorm, "p={p}");
            assert!((gs.kinetic - (0.5 * p - 1.0) * gs.mass).abs() < 1e-5 * gs.pnorm, "p={p}");
        }
    }

    #[test]
    fn gaussian_mixture_single_term_matches_closed_form() {
        let g = GaussianMixture { weights: vec![1.0], alphas: vec![0.5] };
        assert!((g.mass() - PI).abs() < 1e-14);
        assert!((g.kinetic() - PI).abs() < 1e-14);
        for p in [3.0, 4.0] {
            assert!((g.gn_quotient(p) - gaussian_quotient(p)).abs() < 1e-9);
        }
    }

    #[test]
    fn mixture_ascent_stays_below_shooting() {
        let p = 3.0;
        let k = ground_state(p).unwrap().gn_quotient();
        let (best, _) = mixture_ascent(p);
        assert!(best > gaussian_quotient(p));
        assert!(best <= k * (1.0 + 1e-3));
    }

    #[test]
    fn rejects_subcritical_exponent() {
        assert!(ground_state(2.0).is_err());
    }
}
