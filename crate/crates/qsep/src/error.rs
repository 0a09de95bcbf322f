use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Mathematically invalid input (non-unit direction, probability out of
    /// range, non-Hermitian matrix, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A run configuration that cannot be executed as given.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Data that cannot support the requested operation (single-class
    /// training set, empty count records, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A model and a dataset that were produced under different measurement
    /// plans.
    #[error("measurement plan mismatch: {0}")]
    PlanMismatch(String),

    /// Calibration targets outside the reachable region of the source model.
    #[error("calibration infeasible: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code contract of the `qsep` binary:
    /// 0 success, 2 invalid configuration, 3 degenerate data,
    /// 4 measurement-plan mismatch, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Domain(_) | Error::Calibration(_) => 2,
            Error::DegenerateData(_) => 3,
            Error::PlanMismatch(_) => 4,
            _ => 1,
        }
    }
}
