//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands or inputs have incompatible Hilbert-space dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A density matrix failed a physicality check (Hermiticity, trace,
    /// positivity, purity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A channel failed a physicality check (Kraus completeness, Choi
    /// positivity).
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// An argument is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A size guard was exceeded (qubit count, Hilbert dimension).
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A linear system was too ill-conditioned to invert reliably.
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    /// Nonlinear fit did not converge; the message carries diagnostics.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// A measured value is outside the range the inversion formula covers.
    #[error("out of model range: {0}")]
    OutOfModel(String),

    /// Numerical integration failed its step-size validation.
    #[error("integrator error: {0}")]
    Integrator(String),
}
