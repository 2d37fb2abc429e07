//! The Alicki-Fannes-Winter constructions and explicit witness pairs.
//!
//! [`delta_states`] splits a pair into the normalized positive and negative
//! parts of its difference, [`u_states`] goes the other way, and the
//! `*_witness` functions build the state pairs on which particular
//! continuity bounds are attained or nearly attained.

pub mod delta;
pub mod energy;
pub mod witness;

pub use delta::{delta_states, omega_star_check, random_orthogonal_taus, u_states, DeltaTriple, ORTHOGONALITY_TOL};
pub use energy::{cmi_energy_witness, winter_energy_witness, EnergyWitness, WITNESS_TAIL_TOL};
pub use witness::{
    cq_witness, cup_witness, discord_witness, product_distance, upsilon_upper, wilde_witness, WitnessPair, WitnessQuantity,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AfwError {
    #[error("states coincide (trace distance {0:e}); the construction needs rho != sigma")]
    Identical(f64),
    #[error("tau+ and tau- are not orthogonal: Tr(tau+ tau-) = {overlap:e}")]
    NotOrthogonal { overlap: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("truncation too short: tail weight {tail_mass:e} at {levels} levels, {required_levels} needed")]
    Truncation { levels: usize, tail_mass: f64, required_levels: usize },
    #[error(transparent)]
    State(#[from] qstate_core::QError),
    #[error(transparent)]
    Entropic(#[from] entropic::EntropicError),
    #[error(transparent)]
    Energy(#[from] energy_gibbs::EnergyError),
}

pub type AfwResult<T> = Result<T, AfwError>;
