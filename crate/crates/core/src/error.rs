//! Error type shared by every solver in the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or out-of-contract input.
    Input,
    /// A quantity left the binary64 range or a bound could not be honoured.
    Range,
    /// An iterative solver did not converge or found an inconsistent state.
    Solver,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid potential: field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("range error: {0}")]
    Range(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("trajectory left the bounded phase component at t = {t} (psi = {psi}, threshold = {threshold}); H is at or above h(A,q) numerically")]
    BlowUp { t: f64, psi: f64, threshold: f64 },

    #[error("eigenvalue {index}: no bracket found in [{lo}, {hi}]")]
    Bracket { index: usize, lo: f64, hi: f64 },

    #[error("heat trace at t = {t}: truncation error estimate {estimate:e} exceeds 1e-8")]
    Truncation { t: f64, estimate: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("degenerate curve: H = {h} is not inside (9A^2/2, h*(A) = {h_star})")]
    Degenerate { h: f64, h_star: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    /// `ladder` holds `(H, miss)` pairs sampled while searching for a sign change.
    #[error("solver failure: {message}")]
    Solver {
        message: String,
        ladder: Vec<(f64, f64)>,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::Parse(_) | Error::Validation { .. } => ErrorClass::Input,
            Error::Range(_) | Error::Truncation { .. } => ErrorClass::Range,
            Error::Integration { .. }
            | Error::BlowUp { .. }
            | Error::Bracket { .. }
            | Error::Resolution(_)
            | Error::Degenerate { .. }
            | Error::Geometry(_)
            | Error::Solver { .. } => ErrorClass::Solver,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
