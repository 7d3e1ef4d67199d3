use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {coord:?} is outside the lattice range (-{side}/2, {side}/2]^{dim}")]
    InvalidCoordinate {
        coord: Vec<i64>,
        dim: usize,
        side: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("variance kernel is not positive: entry {index} = {value:e}")]
    ProfilePositivity { index: usize, value: f64 },
    #[error("spectral parameter must lie in the upper half-plane, got Im z = {0}")]
    HalfPlane(f64),
    #[error("insufficient samples: {got} trials, need at least {min}")]
    InsufficientSamples { got: usize, min: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("capacity exceeded: {what} = {value} exceeds cap {cap}")]
    Capacity { what: String, value: u128, cap: u128 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("spectral window error: {0}")]
    Window(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Parameter(_)
            | Error::InvalidCoordinate { .. }
            | Error::HalfPlane(_)
            | Error::InsufficientSamples { .. }
            | Error::Range(_)
            | Error::Contract(_)
            | Error::Format(_)
            | Error::Unsupported(_) => 2,
            Error::Capacity { .. } => 3,
            Error::Numeric(_) | Error::ProfilePositivity { .. } | Error::Window(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }

    pub(crate) fn capacity(what: impl Into<String>, value: u128, cap: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            value,
            cap,
        }
    }
}
