//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by validation, numerics and dataset ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("matrix entries must be finite and match dim^2 (dim {dim}, got {len} entries)")]
    BadShape { dim: usize, len: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not unitary: max |u\u{2020}u - 1| entry is {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian: max |m - m\u{2020}| entry is {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("invalid state: {reason}")]
    InvalidState { reason: String },

    #[error("invalid effect: {reason}")]
    InvalidEffect { reason: String },

    #[error("invalid channel: {reason}")]
    InvalidChannel { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("probability for experiment {label} is {value} — outside [0,1] beyond rounding tolerance")]
    ProbabilityOutOfRange { label: String, value: f64 },

    #[error("sigma must be > 0, got {0}")]
    NonPositiveSigma(f64),

    #[error("all cofactor sums vanish: the witness has no first-order statistical sensitivity for this protocol; choose preparations/measurement off a single Bloch circle")]
    DegenerateSensitivity,

    #[error("dataset error at {path}: {reason}")]
    Dataset { path: String, reason: String },

    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("quadrature did not converge: requested {requested:.1e}, achieved about {achieved:.1e}")]
    QuadratureNoConvergence { requested: f64, achieved: f64 },

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
