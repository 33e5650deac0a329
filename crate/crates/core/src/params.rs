use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters: interaction strength `gamma`, nonlinearity strength `a`,
/// nonlinearity exponent `p` and prescribed mass `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub gamma: f64,
    pub a: f64,
    pub p: f64,
    pub c: f64,
}

impl Params {
    pub fn new(gamma: f64, a: f64, p: f64, c: f64) -> Result<Self> {
        let params = Params { gamma, a, p, c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.a.is_finite()) {
            return Err(Error::InvalidParameter("gamma and a must be finite".into()));
        }
        if !(self.p.is_finite() && self.p > 2.0) {
            return Err(Error::InvalidParameter(format!("p must exceed 2, got {}", self.p)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("mass c must be positive, got {}", self.c)));
        }
        Ok(())
    }

    pub fn with_mass(self, c: f64) -> Self {
        Params { c, ..self }
    }

    pub fn with_a(self, a: f64) -> Self {
        Params { a, ..self }
    }
}
