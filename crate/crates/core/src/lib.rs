//! Normalized solutions of the planar Schrödinger–Poisson system
//! `-Δu + λu + γ (log|·| * u²) u = a |u|^{p-2} u` with `∫ u² = c`.

pub mod constants;
pub mod convolution;
pub mod error;
pub mod fiber;
pub mod functionals;
pub mod grid;
pub mod lpf;
pub mod params;
pub mod profile;
pub mod radial;
pub mod regime;
pub mod solvers;
mod spectral;

pub mod cli;

pub use error::{Branch, Error, Result};
pub use functionals::{EnergyBreakdown, Evaluator};
pub use grid::{Field, Grid};
pub use params::Params;
pub use profile::{discretize, ProfileSpec, TwoBump};
pub use spectral::Spectral;
