//! Entropic quantities of finite-dimensional states, in nats.

pub mod elementary;
pub mod quantities;

pub use elementary::{binary_entropy, eta, g_fn, shannon};
pub use quantities::{
    conditional_entropy, conditional_mutual_information, entropy_of_spectrum, holevo_chi, holevo_chi_relative,
    marginal_entropy, matrix_entropy, multipartite_cmi, multipartite_mi, mutual_information, relative_entropy,
    relative_entropy_matrices, reorder, von_neumann_entropy, CondForm, PartitionSpec, RelEntropy,
};

use qstate_core::QError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropicError {
    #[error("{function} undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error(transparent)]
    State(#[from] QError),
}
