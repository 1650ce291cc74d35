use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree pair (d={d}, n={n}): {reason}")]
    InvalidDegree { d: i64, n: i64, reason: &'static str },

    #[error("polynomial space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: u128, cap: usize },

    #[error("dimension mismatch: expected at least {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain mismatch: model domain {expected}, probe domain {got}")]
    DomainMismatch { expected: String, got: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid trajectory{}: {reason}", label_suffix(.id))]
    InvalidTrajectory { id: Option<String>, reason: String },

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment matrix is numerically singular (smallest eigenvalue {min_eigenvalue:e}); use epsilon > 0")]
    Singular { min_eigenvalue: f64 },

    #[error("downdate would break positive semidefiniteness (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("Christoffel-Darboux value is zero at the probe")]
    ZeroCdValue,

    #[error("rank-one fast path requires epsilon = 0, model has epsilon = {0:e}")]
    RegularizedFastPath(f64),

    #[error("model file: unsupported format version {0}")]
    Version(String),

    #[error("model file: checksum mismatch")]
    Checksum,

    #[error("{context}: line {line}: {reason}")]
    Parse { context: String, line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn label_suffix(id: &Option<String>) -> String {
    match id {
        Some(id) => format!(" '{id}'"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse { context: context.into(), line, reason: reason.into() }
    }

    /// Coarse classification used to map failures onto process exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Singular { .. }
            | Error::NotPositiveSemidefinite { .. }
            | Error::ZeroCdValue
            | Error::RegularizedFastPath(_) => ErrorClass::Numerical,
            Error::DimensionMismatch { .. } | Error::DomainMismatch { .. } => ErrorClass::Mismatch,
            _ => ErrorClass::Input,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
    Mismatch,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
