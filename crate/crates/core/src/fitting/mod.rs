//! Nonlinear least-squares engine and the fidelity-decay model functions,
//! with deterministic initialization and Jacobian-based uncertainties.

pub mod engine;
pub mod init;
pub mod models;

pub use engine::{fit, fit_multi_start, FitResult, FitStatus};
pub use init::{
    dominant_oscillation, extract_db_params, fit_db_decay, fit_db_model,
    has_resolvable_oscillation, init_db_model, DbParams,
};
pub use models::{FitModel, ModelKind};
