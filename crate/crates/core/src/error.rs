use thiserror::Error;

/// Errors produced by the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty support")]
    EmptySupport,
    #[error("site index {index} out of range for a lattice with {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },
    #[error("explicit matrices required")]
    ExplicitMatricesRequired,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("series truncation did not converge: {0}")]
    Truncation(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("non-integer spectrum: eigenvalue {0} is not an integer")]
    NonIntegerSpectrum(f64),
    #[error("observable does not commute with P (commutator norm {0:e})")]
    ObservableNotCommuting(f64),
    #[error("below threshold required: physical rate {xi0} must be smaller than threshold {xi_th}")]
    BelowThresholdRequired { xi0: f64, xi_th: f64 },
    #[error("system too large: {n} sites exceeds the dense cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
