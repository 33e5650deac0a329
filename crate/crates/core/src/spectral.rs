//! 2D complex FFTs and periodic spectral operators on the solution grid.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Square 2D FFT built from row transforms and transposes. Both directions are
/// unnormalized.
#[derive(Clone)]
pub(crate) struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.apply(&self.forward, buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.apply(&self.inverse, buf);
    }

    fn apply(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.m * self.m);
        let rows = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(self.m).for_each_init(
                || vec![Complex64::default(); plan.get_inplace_scratch_len()],
                |scratch, row| plan.process_with_scratch(row, scratch),
            );
        };
        rows(buf);
        transpose(buf, self.m);
        rows(buf);
        transpose(buf, self.m);
    }
}

fn transpose(buf: &mut [Complex64], m: usize) {
    const B: usize = 32;
    for bi in (0..m).step_by(B) {
        for bj in (bi..m).step_by(B) {
            for i in bi..(bi + B).min(m) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(m) {
                    buf.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}

/// Angular wavenumber for FFT index `i` on a periodic domain of length `len`.
pub(crate) fn wavenumber(i: usize, m: usize, len: f64) -> f64 {
    let f = if i <= m / 2 { i as f64 } else { i as f64 - m as f64 };
    std::f64::consts::TAU * f / len
}

/// Spectral derivatives on the `n x n` grid, treating fields as periodic.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fft: Fft2,
    k2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let kk: Vec<f64> = (0..n).map(|i| wavenumber(i, n, grid.extent())).collect();
        let mut k2 = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                k2[j * n + i] = kk[i] * kk[i] + kk[j] * kk[j];
            }
        }
        Spectral { grid: *grid, fft: Fft2::new(n), k2 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf
    }

    /// `∫ |∇u|²` via Parseval.
    pub fn kinetic(&self, u: &[f64]) -> f64 {
        let buf = self.transform(u);
        let s: f64 = buf.iter().zip(&self.k2).map(|(z, k)| z.norm_sqr() * k).sum();
        s * self.grid.cell_area() / self.grid.len() as f64
    }

    /// Applies the Fourier multiplier `m(|k|²)`.
    pub fn multiplier(&self, u: &[f64], m: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        let mut buf = self.transform(u);
        let scale = 1.0 / self.grid.len() as f64;
        buf.par_iter_mut().zip(self.k2.par_iter()).for_each(|(z, &k)| *z *= m(k) * scale);
        self.fft.inverse(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    /// `-Δu` together with `∫ |∇u|²`.
    pub fn neg_laplacian(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let lap = self.multiplier(u, |k| k);
        let a = crate::grid::dot(u, &lap) * self.grid.cell_area();
        (lap, a)
    }

    /// `(shift - Δ)^{-1} u`.
    pub fn resolvent(&self, u: &[f64], shift: f64) -> Vec<f64> {
        self.multiplier(u, |k| 1.0 / (shift + k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_round_trip() {
        let m = 64;
        let orig: Vec<Complex64> = (0..m * m).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        let mut buf = orig.clone();
        transpose(&mut buf, m);
        assert_eq!(buf[3 * m + 5], orig[5 * m + 3]);
        transpose(&mut buf, m);
        assert_eq!(buf, orig);
    }

    #[test]
    fn fft_inverse_recovers_input() {
        let f = Fft2::new(32);
        let orig: Vec<Complex64> = (0..1024).map(|k| Complex64::new((k as f64).sin(), 0.0)).collect();
        let mut buf = orig.clone();
        f.forward(&mut buf);
        f.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a / 1024.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_plane_wave() {
        let g = Grid::new(32, 8.0).unwrap();
        let k = std::f64::consts::TAU * 3.0 / 8.0;
        let u: Vec<f64> = (0..g.len()).map(|i| (k * g.point(i).0).cos()).collect();
        let s = Spectral::new(&g);
        let (lap, a) = s.neg_laplacian(&u);
        for (l, v) in lap.iter().zip(&u) {
            assert!((l - k * k * v).abs() < 1e-10);
        }
        // ∫ k² sin² over the box = k² L² / 2
        assert!((a - k * k * 32.0).abs() < 1e-9);
        assert!((s.kinetic(&u) - a).abs() < 1e-9);
    }
}
