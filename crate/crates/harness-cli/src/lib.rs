//! Randomized certification of continuity bounds, adversarial tightness
//! search, controlled-distance pair samplers and the `qcont` CLI.

pub mod adversarial;
pub mod cli;
pub mod quantity;
pub mod sampler;
pub mod suite;
pub mod verify;

pub use adversarial::{adversarial_search, AdversarialResult};
pub use quantity::{pairing, Pairing, Quantity};
pub use sampler::{sample_pair, PairFlavor, SampledPair, Strategy};
pub use suite::default_suite;
pub use verify::{
    trial_seed, verify_bound, verify_many, write_csv, CellReport, Grid, TrialRecord, VerificationConfig,
    VerificationReport, CSV_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("incompatible configuration: {0}")]
    Incompatible(String),
    #[error(transparent)]
    State(#[from] qstate_core::QError),
    #[error(transparent)]
    Entropic(#[from] entropic::EntropicError),
    #[error(transparent)]
    Bound(#[from] bound_catalog::BoundError),
    #[error(transparent)]
    Afw(#[from] afw_lab::AfwError),
    #[error(transparent)]
    Roof(#[from] roof_opt::RoofError),
    #[error(transparent)]
    Energy(#[from] energy_gibbs::EnergyError),
    #[error(transparent)]
    Dini(#[from] approx_dini::DiniError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type HarnessResult<T> = Result<T, HarnessError>;
