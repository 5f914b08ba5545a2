use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient decay: tail estimate {tail:.3e} exceeds {tolerance:.1e}")]
    InsufficientDecay { tail: f64, tolerance: f64 },

    #[error("calibration failed: round-trip error {error:.3e} exceeds {tolerance:.1e} (c_inv = {c_inv:.9e})")]
    Calibration { error: f64, tolerance: f64, c_inv: f64 },

    #[error("point {0:?} is outside the interpolation region of the lattice")]
    OutsideLattice(Vec<f64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),
}

pub type LabResult<T> = Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> LabResult<T> {
    Err(LabError::Domain(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> LabResult<T> {
    Err(LabError::InvalidParameter(msg.into()))
}
