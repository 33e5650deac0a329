//! Run configuration: one JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::error::Branch;
use crate::grid::Grid;
use crate::params::Params;
use crate::profile::ProfileSpec;
use crate::solvers::{Method, SolverConfig};

/// Model parameters as read from the config; any of them may be supplied by flags instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 256, extent: 40.0 }
    }
}

/// Scalars `A`, `C`, `V` fed to the fiber command in place of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarInput {
    #[serde(rename = "A")]
    pub kinetic: f64,
    #[serde(rename = "C")]
    pub pnorm: f64,
    #[serde(rename = "V")]
    pub interaction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberOptions {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: usize,
    pub scalars: Option<ScalarInput>,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions { t_min: None, t_max: None, samples: 400, scalars: None }
    }
}

/// `count` lattice points from `min` to `max`, geometric when `log` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Axis {
    pub fn validate(&self, name: &str) -> Result<(), CliError> {
        let ok = self.min.is_finite() && self.max.is_finite() && self.min < self.max && self.count >= 2;
        if !ok || (self.log && self.min <= 0.0) {
            return Err(CliError::Config(format!("invalid {name} axis {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let s = k as f64 / last;
                if self.log {
                    (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + s * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    /// `min,max,count` with an optional trailing `,log`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let log = match parts.len() {
            3 => false,
            4 if parts[3] == "log" => true,
            _ => return Err(format!("expected min,max,count[,log], got {s:?}")),
        };
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let count = parts[2].parse::<usize>().map_err(|e| format!("{:?}: {e}", parts[2]))?;
        Ok(Axis { min: num(parts[0])?, max: num(parts[1])?, count, log })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub a: Axis,
    pub c: Axis,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            a: Axis { min: 1.0, max: 40.0, count: 60, log: true },
            c: Axis { min: 0.05, max: 20.0, count: 60, log: true },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Solver override; chosen from the regime when absent.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default = "default_init")]
    pub init: ProfileSpec,
    #[serde(default)]
    pub fiber: FiberOptions,
    #[serde(default)]
    pub sweep: SweepOptions,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_init() -> ProfileSpec {
    ProfileSpec::gaussian(1.0, 1.0)
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            method: None,
            init: default_init(),
            fiber: FiberOptions::default(),
            sweep: SweepOptions::default(),
            output: None,
        }
    }
}

/// Flag values layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub grid_n: Option<usize>,
    pub grid_extent: Option<f64>,
    pub seed: Option<u64>,
    pub trace: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        let p = &mut self.params;
        p.gamma = o.gamma.or(p.gamma);
        p.a = o.a.or(p.a);
        p.p = o.p.or(p.p);
        p.c = o.c.or(p.c);
        if let Some(n) = o.grid_n {
            self.grid.n = n;
        }
        if let Some(l) = o.grid_extent {
            self.grid.extent = l;
        }
        if let Some(seed) = o.seed {
            self.solver.seed = seed;
        }
        self.solver.trace |= o.trace;
        if o.out.is_some() {
            self.output = o.out.clone();
        }
    }

    /// All four parameters, validated.
    pub fn params(&self) -> Result<Params, CliError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("missing parameter {name} (set params.{name} or pass --{name})")))
        };
        let p = &self.params;
        let params = Params { gamma: need(p.gamma, "gamma")?, a: need(p.a, "a")?, p: need(p.p, "p")?, c: need(p.c, "c")? };
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(params)
    }

    pub fn exponent(&self) -> Result<f64, CliError> {
        match self.params.p {
            Some(p) if p.is_finite() && p > 2.0 => Ok(p),
            Some(p) => Err(CliError::Config(format!("p must exceed 2, got {p}"))),
            None => Err(CliError::Config("missing parameter p (set params.p or pass --p)".into())),
        }
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.n, self.grid.extent).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Checks everything a command may touch, before any field is allocated.
    pub fn validate_solver(&self) -> Result<(), CliError> {
        self.solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.init.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn with_method(mut self, method: Option<&str>, branch: Option<Branch>) -> Result<Self, CliError> {
        let branch = branch.unwrap_or(Branch::Plus);
        self.method = match method {
            None => self.method,
            Some("global_minimize") => Some(Method::GlobalMinimize),
            Some("local_minimize_capped") => Some(Method::LocalMinimizeCapped),
            Some("lambda_branch_minimize") => Some(Method::LambdaBranchMinimize(branch)),
            Some("lambda_maximize") => Some(Method::LambdaMaximize(branch)),
            Some(other) => return Err(CliError::Config(format!("unknown method {other:?}"))),
        };
        Ok(self)
    }
}
