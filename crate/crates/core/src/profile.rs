//! Synthetic initial profiles and their discretization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, BOUNDARY_LIMIT};

/// A profile shape together with its target mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn default_envelope() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `exp(-|x - center|^2 / (2 sigma^2))`.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `exp(-(|x| - r0)^2 / (2 sigma^2))`.
    Ring { r0: f64, sigma: f64 },
    TwoBump(TwoBump),
    /// Band-limited random modes under a Gaussian envelope.
    RandomSmooth {
        seed: u64,
        cutoff: f64,
        #[serde(default = "default_envelope")]
        envelope: f64,
    },
}

/// Two compactly supported lobes: `u(x) + (1/n) v((x - n R e1) / n)`, where
/// `u` and `v` are smooth bumps of radii `radius` and `tail_radius`.
/// The second lobe carries `tail_fraction` of the mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBump {
    pub separation: f64,
    pub scale: f64,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub tail_radius: Option<f64>,
    #[serde(default = "half")]
    pub tail_fraction: f64,
}

impl TwoBump {
    pub fn new(separation: f64, scale: f64) -> Self {
        TwoBump { separation, scale, radius: 1.0, tail_radius: None, tail_fraction: 0.5 }
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail_radius.unwrap_or(self.radius)
    }

    fn validate(&self) -> Result<()> {
        let rv = self.tail_radius();
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidParameter("two_bump separation must be positive".into()));
        }
        if !(self.scale >= 1.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter("two_bump scale must be at least 1".into()));
        }
        if !(self.radius > 0.0 && rv > 0.0 && self.radius.is_finite() && rv.is_finite()) {
            return Err(Error::InvalidParameter("two_bump radii must be positive".into()));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(Error::InvalidParameter("two_bump tail_fraction must lie in (0, 1)".into()));
        }
        if self.scale * self.separation <= self.radius + self.scale * rv {
            return Err(Error::InvalidParameter(format!(
                "two_bump lobes overlap: n*R = {} <= {} (sum of lobe radii)",
                self.scale * self.separation,
                self.radius + self.scale * rv
            )));
        }
        Ok(())
    }

    /// Centers and radii of the two lobes, placed so their union is centered.
    pub fn layout(&self) -> [(f64, f64); 2] {
        let n = self.scale;
        let rv = self.tail_radius();
        let xa = 0.5 * (self.radius - n * self.separation - n * rv);
        [(xa, self.radius), (xa + n * self.separation, n * rv)]
    }
}

/// Smooth compactly supported bump `exp(-1 / (1 - r^2/rho^2))` on `r < rho`.
pub fn bump(r: f64, rho: f64) -> f64 {
    let s = r / rho;
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl ProfileSpec {
    pub fn gaussian(sigma: f64, mass: f64) -> Self {
        ProfileSpec { kind: ProfileKind::Gaussian { sigma, center: [0.0, 0.0] }, mass }
    }

    pub fn ring(r0: f64, sigma: f64, mass: f64) -> Self {
        ProfileSpec { kind: ProfileKind::Ring { r0, sigma }, mass }
    }

    pub fn two_bump(tb: TwoBump, mass: f64) -> Self {
        ProfileSpec { kind: ProfileKind::TwoBump(tb), mass }
    }

    pub fn random_smooth(seed: u64, cutoff: f64, mass: f64) -> Self {
        ProfileSpec {
            kind: ProfileKind::RandomSmooth { seed, cutoff, envelope: default_envelope() },
            mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("profile mass must be positive, got {}", self.mass)));
        }
        match &self.kind {
            ProfileKind::Gaussian { sigma, center } => {
                if !(*sigma > 0.0 && sigma.is_finite()) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidParameter("gaussian needs sigma > 0".into()));
                }
            }
            ProfileKind::Ring { r0, sigma } => {
                if !(*r0 >= 0.0 && *sigma > 0.0 && r0.is_finite() && sigma.is_finite()) {
                    return Err(Error::InvalidParameter("ring needs r0 >= 0 and sigma > 0".into()));
                }
            }
            ProfileKind::TwoBump(tb) => tb.validate()?,
            ProfileKind::RandomSmooth { cutoff, envelope, .. } => {
                if !(*cutoff > 0.0 && *envelope > 0.0 && cutoff.is_finite() && envelope.is_finite()) {
                    return Err(Error::InvalidParameter("random_smooth needs cutoff > 0 and envelope > 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// Samples the profile on `grid` and rescales it to the target mass.
pub fn discretize(spec: &ProfileSpec, grid: &Grid) -> Result<Field> {
    spec.validate()?;
    let field = match &spec.kind {
        ProfileKind::Gaussian { sigma, center } => {
            let s2 = 2.0 * sigma * sigma;
            let [cx, cy] = *center;
            Field::from_fn(*grid, |x, y| (-((x - cx).powi(2) + (y - cy).powi(2)) / s2).exp())?
        }
        ProfileKind::Ring { r0, sigma } => {
            let s2 = 2.0 * sigma * sigma;
            Field::from_fn(*grid, |x, y| (-((x.hypot(y) - r0).powi(2)) / s2).exp())?
        }
        ProfileKind::TwoBump(tb) => {
            let (u, v) = two_bump_lobes(tb, spec.mass, grid)?;
            let values = u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect();
            return Field::new(*grid, values);
        }
        ProfileKind::RandomSmooth { seed, cutoff, envelope } => random_smooth(*seed, *cutoff, *envelope, grid)?,
    };
    field.check_boundary(BOUNDARY_LIMIT)?;
    field.normalize(spec.mass)
}

/// The two lobes of a two-bump profile, each normalized to its share of `mass`.
pub fn two_bump_lobes(tb: &TwoBump, mass: f64, grid: &Grid) -> Result<(Field, Field)> {
    tb.validate()?;
    let [(xa, ra), (xb, rb)] = tb.layout();
    let first = Field::from_fn(*grid, |x, y| bump((x - xa).hypot(y), ra))?;
    let second = Field::from_fn(*grid, |x, y| bump((x - xb).hypot(y), rb))?;
    first.check_boundary(BOUNDARY_LIMIT)?;
    second.check_boundary(BOUNDARY_LIMIT)?;
    Ok((first.normalize((1.0 - tb.tail_fraction) * mass)?, second.normalize(tb.tail_fraction * mass)?))
}

fn random_smooth(seed: u64, cutoff: f64, envelope: f64, grid: &Grid) -> Result<Field> {
    const MODES: usize = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (0..MODES)
        .map(|_| {
            let k = cutoff * rng.gen::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.gen::<f64>();
            let phase = std::f64::consts::TAU * rng.gen::<f64>();
            let amp = rng.gen_range(-1.0..1.0);
            (k * theta.cos(), k * theta.sin(), phase, amp)
        })
        .collect();
    let offset = [rng.gen_range(-0.5..0.5) * envelope, rng.gen_range(-0.5..0.5) * envelope];
    let s2 = 2.0 * envelope * envelope;
    Field::from_fn(*grid, |x, y| {
        let modulation: f64 = modes.iter().map(|(kx, ky, ph, a)| a * (kx * x + ky * y + ph).cos()).sum();
        let env = (-((x - offset[0]).powi(2) + (y - offset[1]).powi(2)) / s2).exp();
        env * (1.0 + 0.5 * modulation / (MODES as f64).sqrt())
    })
}
