use thiserror::Error;

/// Errors produced by grid construction, media, transforms and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: expected {expected} points, got {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("aliasing detected: {0}")]
    Aliasing(String),

    #[error("medium evaluated at r = {position} outside its declared window [{lo}, {hi}]")]
    OutsideWindow { position: f64, lo: f64, hi: f64 },

    #[error("wavenumber {k} is not a node of the k grid (spacing {dk})")]
    OffGrid { k: f64, dk: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    Stability { dt: f64, bound: f64 },

    #[error("non-finite value detected at step {step}")]
    NonFinite { step: u64 },

    #[error("reference node is a field zero: |Phi(r_ref)|^2 = {amplitude:e} is below threshold {threshold:e}")]
    ReferenceZero { amplitude: f64, threshold: f64 },

    #[error("imaginary residue {residue:e} exceeds {limit:e} in `{component}`")]
    ImaginaryResidue {
        component: &'static str,
        residue: f64,
        limit: f64,
    },

    #[error("series mode unavailable: {0}")]
    SeriesUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
