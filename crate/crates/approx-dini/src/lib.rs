//! Spectral truncations `Psi_m(rho) = P_m rho` and finite-grid experiments
//! on entropy discontinuity: the jump formula, dominated convergence and
//! convergence of mixtures.
//!
//! Limits are replaced by plateau detection on explicit grids, and every
//! report carries the grid it was computed on.

use qstate_core::QError;

pub mod diag;
pub mod experiments;
pub mod sequence;
pub mod truncation;

pub use diag::{DiagState, SeqState};
pub use experiments::{
    dominated_convergence_check, entropy_jump_experiment, mixture_convergence_check, plateau,
    DctReport, DiniQuantity, JumpCell, JumpReport, MEstimate, MixtureReport, JUMP_FLOOR,
    MIXTURE_TOL, PLATEAU_REL,
};
pub use sequence::{designed_mixture, SequenceSpec, StateSequence};
pub use truncation::{
    mirsky_check, monotone_defect, spectral_truncation, uniform_trace_convergence, TraceRow,
    TruncationRecord,
};

/// Gap below which two eigenvalues count as equal when selecting `M^s`.
pub const GAP_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum DiniError {
    #[error("distance to the limit grows from {from} to {to} at n = {n}")]
    NotConvergent { n: u32, from: f64, to: f64 },
    #[error("c rho_n <= tau_n fails at n = {n} (min eigenvalue {min_eig})")]
    NotDominated { n: u32, min_eig: f64 },
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    State(#[from] QError),
    #[error(transparent)]
    Entropic(#[from] entropic::EntropicError),
}

pub type DiniResult<T> = Result<T, DiniError>;
