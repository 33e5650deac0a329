use std::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid resolution must be a power of two and at least 16, got {0}")]
    InvalidResolution(usize),
    #[error("grid extent must be positive and finite, got {0}")]
    InvalidExtent(f64),
    #[error("field has {actual} values, grid expects {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has zero mass")]
    ZeroField,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("boundary mass fraction {fraction:.3e} exceeds {limit:.1e}; enlarge the domain")]
    BoundaryLeak { fraction: f64, limit: f64 },
    #[error("field mass {actual} does not match prescribed mass {expected}")]
    MassMismatch { expected: f64, actual: f64 },
    #[error("dilation factor must be positive and finite, got {0}")]
    InvalidDilation(f64),
    #[error("fiber has no {0} critical point")]
    BranchAbsent(Branch),
    #[error("fiber root bracketing failed: {0}")]
    Bracketing(String),
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("degenerate fiber scalars: {0}")]
    DegenerateScalars(String),
    #[error("shooting failed: {0}")]
    Shooting(String),
    #[error("LPF1 format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Branch of the fiber-map critical set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Local minimum of the fiber map (second derivative positive).
    Plus,
    /// Local maximum of the fiber map (second derivative negative).
    Minus,
    /// Degenerate critical point (second derivative zero).
    Zero,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
            Branch::Zero => "zero",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            "zero" | "0" => Ok(Branch::Zero),
            other => Err(Error::InvalidParameter(format!("unknown branch {other:?}"))),
        }
    }
}
