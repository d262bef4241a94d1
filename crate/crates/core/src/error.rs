use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "aliasing: N/2 = {half_n} is below 2*ceil(tau^-1/2) = {required} (use the warn or off dealias policy)"
    )]
    Aliasing { half_n: usize, required: usize },

    #[error("numerical abort at step {step}: {reason}")]
    NumericalAbort { step: u64, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for failures caused by the numerics (NaN, blow-up) rather than by
    /// the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalAbort { .. })
    }
}
