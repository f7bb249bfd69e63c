use thiserror::Error;

/// Crate-wide error type. Statistical failures are not errors; these are
/// contract violations (bad inputs, bad state) or I/O problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("symbol {symbol} out of range for domain size {k}")]
    SymbolOutOfRange { symbol: u32, k: usize },

    #[error("insufficient users: need at least {needed}, got {got}")]
    InsufficientUsers { needed: usize, got: usize },

    #[error("infeasible coupling: {0}")]
    InfeasibleCoupling(String),

    #[error("calibration required: {0}")]
    CalibrationRequired(String),

    #[error("privacy audit failed: {0}")]
    AuditFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for the CLI: 1 for a failed statistical bound,
    /// 2 for configuration problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AuditFailed(_) => 1,
            Error::Io(_) | Error::Csv(_) => 3,
            Error::Json(_) => 3,
            _ => 2,
        }
    }
}
