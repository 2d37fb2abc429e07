//! Hamiltonian spectra, Gibbs states and the maximal entropy under an energy
//! constraint, `F_H(E) = sup { S(rho) : Tr H rho <= E }`.
//!
//! Explicit spectra are solved directly. Infinite model spectra are truncated
//! and the truncation is grown until the Gibbs weight of the dropped levels is
//! certified small.

pub mod diagnostics;
pub mod gibbs;
pub mod spectrum;

pub use diagnostics::{growth_diagnostics, GrowthRow, DIAGNOSTIC_TAIL_LIMIT};
pub use gibbs::{
    certify, f_h, f_h_model, f_h_truncated, oscillator_f_h, f_n_closed_form, g_osc, gibbs_beta, gibbs_point, gibbs_probabilities, gibbs_state,
    CertifiedGibbs, GibbsPoint, BETA_RESIDUAL_TOL, TAIL_TOL,
};
pub use spectrum::{HamiltonianSpectrum, SpectrumModel, SpectrumSource, MAX_LEVELS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid spectrum: {0}")]
    Spectrum(String),
    #[error("io: {0}")]
    Io(String),
    #[error("spectrum of {0} levels is too large for a dense state")]
    TooLarge(usize),
    #[error("truncation not certified at E={energy}: tail weight {tail_mass:e}, about {required_levels:.3e} levels needed")]
    Truncation { energy: f64, tail_mass: f64, required_levels: f64 },
}
