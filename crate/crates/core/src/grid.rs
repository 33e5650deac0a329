//! Uniform square grids and real fields sampled on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Fft2;

/// Largest boundary mass fraction tolerated by discretization and dilation.
pub const BOUNDARY_LIMIT: f64 = 1e-6;

/// Square grid `[-L/2, L/2)^2` with `n` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct Grid {
    n: usize,
    extent: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    n: usize,
    #[serde(rename = "L")]
    extent: f64,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid::new(raw.n, raw.extent)
    }
}

impl From<Grid> for RawGrid {
    fn from(g: Grid) -> Self {
        RawGrid { n: g.n, extent: g.extent }
    }
}

impl Grid {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidResolution(n));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidExtent(extent));
        }
        Ok(Grid { n, extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Area of one cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.extent + i as f64 * self.spacing()
    }

    /// Coordinates `(x, y)` of the node at flat index `k` (row-major, rows are `y`).
    pub fn point(&self, k: usize) -> (f64, f64) {
        (self.coord(k % self.n), self.coord(k / self.n))
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.extent.to_bits() == other.extent.to_bits()
    }
}

/// Immutable real field on a grid, stored row-major (`values[j * n + i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let y = grid.coord(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.coord(i), y);
            }
        });
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n + i]
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `∫ u v` by the midpoint rule.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        Ok(dot(&self.values, &other.values) * self.grid.cell_area())
    }

    /// Squared L² norm `∫ u²`.
    pub fn mass(&self) -> f64 {
        dot(&self.values, &self.values) * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((s * self.grid.cell_area()).sqrt())
    }

    pub fn scale(&self, factor: f64) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Rescales to mass `c`.
    pub fn normalize(&self, c: f64) -> Result<Field> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {c}")));
        }
        let m = self.mass();
        if m == 0.0 {
            return Err(Error::ZeroField);
        }
        self.scale((c / m).sqrt())
    }

    /// Fraction of the mass lying outside the central square of side `0.8 L`.
    pub fn boundary_mass_fraction(&self) -> Result<f64> {
        let n = self.grid.n;
        let half = 0.4 * self.grid.extent;
        let mut total = 0.0;
        let mut outer = 0.0;
        for j in 0..n {
            let y_out = self.grid.coord(j).abs() > half;
            for i in 0..n {
                let v = self.values[j * n + i];
                let m = v * v;
                total += m;
                if y_out || self.grid.coord(i).abs() > half {
                    outer += m;
                }
            }
        }
        if total == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(outer / total)
    }

    /// Errors if the boundary mass fraction exceeds `limit`.
    pub fn check_boundary(&self, limit: f64) -> Result<f64> {
        let fraction = self.boundary_mass_fraction()?;
        if fraction > limit {
            Err(Error::BoundaryLeak { fraction, limit })
        } else {
            Ok(fraction)
        }
    }

    /// Mass-preserving dilation `u^t(x) = t u(t x)`, resampled with bicubic
    /// Catmull-Rom interpolation and zero extension outside the grid.
    pub fn dilate(&self, t: f64) -> Result<Field> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidDilation(t));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let grid = self.grid;
        let n = grid.n;
        let h = grid.spacing();
        let origin = -0.5 * grid.extent;
        let mut out = vec![0.0; grid.len()];
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let fy = (t * grid.coord(j) - origin) / h;
            for (i, v) in row.iter_mut().enumerate() {
                let fx = (t * grid.coord(i) - origin) / h;
                *v = t * self.sample(fx, fy);
            }
        });
        let field = Field::new(grid, out)?;
        field.check_boundary(BOUNDARY_LIMIT)?;
        Ok(field)
    }

    /// Catmull-Rom interpolation at fractional index coordinates.
    fn sample(&self, fx: f64, fy: f64) -> f64 {
        let n = self.grid.n as isize;
        if fx < -1.0 || fy < -1.0 || fx > n as f64 || fy > n as f64 {
            return 0.0;
        }
        let ix = fx.floor();
        let iy = fy.floor();
        let wx = catmull_rom(fx - ix);
        let wy = catmull_rom(fy - iy);
        let (ix, iy) = (ix as isize, iy as isize);
        let mut acc = 0.0;
        for (dj, wyj) in wy.iter().enumerate() {
            let jj = iy + dj as isize - 1;
            if jj < 0 || jj >= n {
                continue;
            }
            let row = &self.values[jj as usize * n as usize..(jj as usize + 1) * n as usize];
            let mut racc = 0.0;
            for (di, wxi) in wx.iter().enumerate() {
                let ii = ix + di as isize - 1;
                if ii >= 0 && ii < n {
                    racc += wxi * row[ii as usize];
                }
            }
            acc += wyj * racc;
        }
        acc
    }

    /// Cyclic shift by whole cells, used for translation checks.
    pub fn roll(&self, di: isize, dj: isize) -> Field {
        let n = self.grid.n as isize;
        let mut out = vec![0.0; self.grid.len()];
        for j in 0..n {
            for i in 0..n {
                let si = (i - di).rem_euclid(n);
                let sj = (j - dj).rem_euclid(n);
                out[(j * n + i) as usize] = self.values[(sj * n + si) as usize];
            }
        }
        Field { grid: self.grid, values: out }
    }

    /// L² distance to `other` after the lattice translation of `other` that
    /// maximizes their (periodic) correlation; returns the distance and shift.
    pub fn aligned_distance(&self, other: &Field) -> Result<(f64, [isize; 2])> {
        self.check_grid(other)?;
        let n = self.grid.n;
        let fft = Fft2::new(n);
        let mut a: Vec<Complex64> = self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut b: Vec<Complex64> = other.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.forward(&mut a);
        fft.forward(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y.conj();
        }
        fft.inverse(&mut a);
        let best = (0..a.len()).max_by(|&i, &j| a[i].re.total_cmp(&a[j].re)).unwrap_or(0);
        let wrap = |k: usize| if k > n / 2 { k as isize - n as isize } else { k as isize };
        let shift = [wrap(best % n), wrap(best / n)];
        Ok((self.l2_distance(&other.roll(shift[0], shift[1]))?, shift))
    }
}

fn catmull_rom(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid, sigma: f64) -> Field {
        Field::from_fn(grid, |x, y| (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()).unwrap()
    }

    #[test]
    fn aligned_distance_undoes_rolls() {
        let g = Grid::new(64, 16.0).unwrap();
        let u = Field::from_fn(g, |x, y| (-(x - 1.0).powi(2) - 0.5 * y * y).exp()).unwrap();
        let v = u.roll(-5, 7);
        let (d, shift) = u.aligned_distance(&v).unwrap();
        assert_eq!(shift, [5, -7]);
        assert!(d < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(Grid::new(100, 1.0), Err(Error::InvalidResolution(100))));
        assert!(matches!(Grid::new(8, 1.0), Err(Error::InvalidResolution(8))));
        assert!(matches!(Grid::new(64, 0.0), Err(Error::InvalidExtent(_))));
        assert!(matches!(Grid::new(64, f64::NAN), Err(Error::InvalidExtent(_))));
    }

    #[test]
    fn coordinates_start_at_lower_corner() {
        let g = Grid::new(16, 8.0).unwrap();
        assert_eq!(g.coord(0), -4.0);
        assert_eq!(g.coord(8), 0.0);
        assert_eq!(g.point(16 * 3 + 2), (-3.0, -2.5));
    }

    #[test]
    fn rejects_nan_and_wrong_length() {
        let g = Grid::new(16, 1.0).unwrap();
        assert!(matches!(Field::new(g, vec![0.0; 10]), Err(Error::LengthMismatch { .. })));
        let mut v = vec![0.0; 256];
        v[3] = f64::NAN;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite)));
    }

    #[test]
    fn normalize_hits_target_mass() {
        let g = Grid::new(64, 20.0).unwrap();
        let u = gaussian(g, 1.3).normalize(2.5).unwrap();
        assert!((u.mass() - 2.5).abs() < 1e-12);
        assert!(matches!(Field::zeros(g).normalize(1.0), Err(Error::ZeroField)));
    }

    #[test]
    fn constant_field_boundary_fraction() {
        let g = Grid::new(1024, 1.0).unwrap();
        let u = Field::from_fn(g, |_, _| 1.0).unwrap();
        assert!((u.boundary_mass_fraction().unwrap() - 0.36).abs() < 2e-3);
        assert!(matches!(Field::zeros(g).boundary_mass_fraction(), Err(Error::ZeroField)));
    }

    #[test]
    fn dilation_preserves_mass_and_composes() {
        let g = Grid::new(128, 24.0).unwrap();
        let u = gaussian(g, 1.5).normalize(1.0).unwrap();
        let d = u.dilate(1.7).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-4);
        let back = d.dilate(1.0 / 1.7).unwrap();
        assert!(back.l2_distance(&u).unwrap() < 1e-3);
        assert_eq!(u.dilate(1.0).unwrap(), u);
    }

    #[test]
    fn dilation_that_spreads_to_boundary_fails() {
        let g = Grid::new(64, 20.0).unwrap();
        let u = gaussian(g, 1.0);
        assert!(matches!(u.dilate(0.2), Err(Error::BoundaryLeak { .. })));
        assert!(matches!(u.dilate(-1.0), Err(Error::InvalidDilation(_))));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let u = Field::zeros(Grid::new(16, 1.0).unwrap());
        let v = Field::zeros(Grid::new(16, 2.0).unwrap());
        assert!(matches!(u.inner(&v), Err(Error::GridMismatch)));
    }
}
