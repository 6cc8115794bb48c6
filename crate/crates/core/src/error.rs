use thiserror::Error;

/// Errors raised by the symbol, operator, geometry and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported torus dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("bracket arity {got} does not match dimension {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("generalized commutator needs an even arity between 2 and 6, got {0}")]
    BadArity(usize),

    #[error("operator size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("symplectic form is invalid: {0}")]
    InvalidForm(String),

    #[error("complex-structure index {0} out of range")]
    StructureIndex(usize),

    #[error("quantization level must be positive")]
    ZeroLevel,

    #[error("polarization is not positive for the chosen complex structure")]
    NonPositivePolarization,

    #[error("no signed-coordinate symplectic basis exists for this form")]
    UnsupportedPolarization,

    #[error("quadrature grid too coarse: entries moved by {change:e} on doubling")]
    GridTooCoarse { change: f64 },

    #[error("norm iteration did not converge after {iterations} steps (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("too few usable points for a rate fit: {usable} (need {needed})")]
    TooFewPoints { usable: usize, needed: usize },

    #[error("invalid symbol specification: {0}")]
    SymbolSpec(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
