//! Free-space convolution with the logarithmic kernels on a 2x zero-padded grid.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::spectral::Fft2;

/// `Γ(1/4)`.
const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
/// `Z(-1/2)` for the Epstein zeta function `Z(s) = Σ' |m|^{-2s}` of the square lattice.
const LATTICE_ZETA_NEG_HALF: f64 = -0.228_824_310_377_219;

/// `Z'(0)/2` for the same lattice zeta function.
fn lattice_zeta_prime_half() -> f64 {
    let pi = std::f64::consts::PI;
    -0.5 * (2.0 * pi).ln() - (GAMMA_QUARTER * GAMMA_QUARTER / (2.0 * pi * std::f64::consts::SQRT_2)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// `log r`
    Log,
    /// `log(1 + r)`
    LogOnePlus,
    /// `log(1 + 1/r)`
    LogOnePlusInv,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Log, Kernel::LogOnePlus, Kernel::LogOnePlusInv];

    pub fn eval(self, r: f64) -> f64 {
        match self {
            Kernel::Log => r.ln(),
            Kernel::LogOnePlus => r.ln_1p(),
            Kernel::LogOnePlusInv => (1.0 / r).ln_1p(),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// How the singular (or non-smooth) kernel value at zero separation is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginRule {
    /// Origin weight chosen so the punctured lattice sum matches the integral to
    /// fourth order in `h` for smooth densities.
    #[default]
    LatticeCorrected,
    /// Exact average of the kernel over the origin cell (second order).
    CellAverage,
}

/// Origin weight of `kernel` at spacing `h`.
pub fn origin_value(kernel: Kernel, h: f64, rule: OriginRule) -> f64 {
    match rule {
        OriginRule::LatticeCorrected => {
            let log_part = h.ln() + lattice_zeta_prime_half();
            let one_plus = -h * LATTICE_ZETA_NEG_HALF;
            match kernel {
                Kernel::Log => log_part,
                Kernel::LogOnePlus => one_plus,
                Kernel::LogOnePlusInv => one_plus - log_part,
            }
        }
        OriginRule::CellAverage => cell_average(kernel, h),
    }
}

/// Average of `kernel(|x|)` over the square `[-h/2, h/2]²`, by nested adaptive
/// double-exponential quadrature over one eighth of the cell.
pub fn cell_average(kernel: Kernel, h: f64) -> f64 {
    let half = 0.5 * h;
    let outer = quadrature::integrate(
        |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            quadrature::integrate(|y: f64| kernel.eval(x.hypot(y)), 0.0, x, 1e-12).integral
        },
        0.0,
        half,
        1e-12,
    );
    8.0 * outer.integral / (h * h)
}

/// Convolution machinery for one grid: kernel spectra on the padded `2n x 2n` grid.
#[derive(Clone)]
pub struct Convolver {
    grid: Grid,
    fft: Fft2,
    spectra: [Vec<f64>; 3],
    origin: [f64; 3],
}

impl Convolver {
    pub fn new(grid: &Grid, rule: OriginRule) -> Self {
        let h = grid.spacing();
        let origin = Kernel::ALL.map(|k| origin_value(k, h, rule));
        Self::with_origin_values(grid, origin)
    }

    /// Uses caller-chosen origin weights for the three kernels.
    pub fn with_origin_values(grid: &Grid, origin: [f64; 3]) -> Self {
        let m = 2 * grid.n();
        let fft = Fft2::new(m);
        let spectra = Kernel::ALL.map(|k| kernel_spectrum(&fft, grid, k, origin[k.index()]));
        Convolver { grid: *grid, fft, spectra, origin }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn origin_values(&self) -> [f64; 3] {
        self.origin
    }

    /// Transform of the zero-padded density.
    pub fn density_spectrum(&self, rho: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let m = self.fft.size();
        let mut buf = vec![Complex64::default(); m * m];
        buf.par_chunks_mut(m).take(n).enumerate().for_each(|(j, row)| {
            for i in 0..n {
                row[i] = Complex64::new(rho[j * n + i], 0.0);
            }
        });
        self.fft.forward(&mut buf);
        buf
    }

    /// `∬ K(|x - y|) ρ(x) ρ(y)` from the padded density spectrum.
    pub fn pair_energy(&self, rho_hat: &[Complex64], kernel: Kernel) -> f64 {
        let m = self.fft.size() as f64;
        let area = self.grid.cell_area();
        let s: f64 = rho_hat.iter().zip(&self.spectra[kernel.index()]).map(|(z, k)| z.norm_sqr() * k).sum();
        s * area * area / (m * m)
    }

    /// `(K * ρ)(x)` on the grid nodes.
    pub fn potential(&self, rho_hat: &[Complex64], kernel: Kernel) -> Vec<f64> {
        let n = self.grid.n();
        let m = self.fft.size();
        let scale = self.grid.cell_area() / (m * m) as f64;
        let spec = &self.spectra[kernel.index()];
        let mut buf: Vec<Complex64> = rho_hat.par_iter().zip(spec.par_iter()).map(|(z, k)| z * (k * scale)).collect();
        self.fft.inverse(&mut buf);
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = buf[j * m + i].re;
            }
        });
        out
    }
}

fn kernel_spectrum(fft: &Fft2, grid: &Grid, kernel: Kernel, origin: f64) -> Vec<f64> {
    let m = fft.size();
    let n = grid.n() as isize;
    let h = grid.spacing();
    let offset = |i: usize| {
        let i = i as isize;
        if i < n {
            i
        } else {
            i - 2 * n
        }
    };
    let mut buf = vec![Complex64::default(); m * m];
    buf.par_chunks_mut(m).enumerate().for_each(|(j, row)| {
        let dy = offset(j) as f64;
        for (i, z) in row.iter_mut().enumerate() {
            let dx = offset(i) as f64;
            let v = if i == 0 && j == 0 { origin } else { kernel.eval(h * dx.hypot(dy)) };
            *z = Complex64::new(v, 0.0);
        }
    });
    fft.forward(&mut buf);
    buf.iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_constant_value() {
        assert!((lattice_zeta_prime_half() + 1.310_532_925_911_509_3).abs() < 1e-13);
    }

    #[test]
    fn origin_weights_respect_kernel_identity() {
        for rule in [OriginRule::LatticeCorrected, OriginRule::CellAverage] {
            let h = 0.078125;
            let [a, b, c] = Kernel::ALL.map(|k| origin_value(k, h, rule));
            assert!((a - (b - c)).abs() < 1e-9, "{rule:?}");
        }
    }

    #[test]
    fn cell_average_of_log_matches_closed_form() {
        // average of log|x| over the unit square [-1/2, 1/2]^2
        let exact = (2f64.ln() - 3.0) / 2.0 - 2f64.ln() + std::f64::consts::PI / 4.0;
        assert!((cell_average(Kernel::Log, 1.0) - exact).abs() < 1e-10);
        let h = 0.1;
        assert!((cell_average(Kernel::Log, h) - (exact + h.ln())).abs() < 1e-10);
    }

    #[test]
    fn point_mass_potential_is_the_kernel() {
        let g = Grid::new(32, 8.0).unwrap();
        let conv = Convolver::new(&g, OriginRule::LatticeCorrected);
        let mut rho = vec![0.0; g.len()];
        let c = 16 * 32 + 16;
        rho[c] = 1.0 / g.cell_area();
        let hat = conv.density_spectrum(&rho);
        let w = conv.potential(&hat, Kernel::Log);
        for k in [0usize, 5, 33, 1000] {
            let (x, y) = g.point(k);
            assert!((w[k] - x.hypot(y).ln()).abs() < 1e-10);
        }
        assert!((w[c] - conv.origin_values()[0]).abs() < 1e-10);
    }
}
