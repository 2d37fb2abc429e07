//! Finite-dimensional quantum states: Hermitian spectral calculus, labelled tensor
//! layouts, partial traces, purification, trace distance and fidelity.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the root fix
//! double precision, which is what the rest of the workspace uses.

pub mod error;
pub mod hermitian;
pub mod json;
pub mod layout;
pub mod random;
pub mod real;
pub mod state;

pub use error::{QError, QResult};
pub use hermitian::{
    eigh, eigh_matrix, eigvalsh, matrix_function, positive_negative_parts, sqrt_psd, trace_norm, CMatrix,
    CVector, EigenDecomposition, HermitianMatrix,
};
pub use json::{state_from_json, state_to_json, StateJson};
pub use layout::{Part, SystemLayout};
pub use random::{random_mixed, random_mixed_with, random_pure, random_pure_with, rng_from_seed, StateRng};
pub use real::Real;
pub use state::{
    chaotic, cq_state, fidelity, kron, maximally_entangled, partial_trace, partial_trace_matrix, purify, qc_state,
    same_layout, tensor, trace_distance, DensityMatrix, Ensemble,
};

pub use num_complex::Complex;

/// Largest total Hilbert-space dimension accepted anywhere.
pub const MAX_DIM: usize = 4096;

pub type Density = DensityMatrix<f64>;
pub type Hermitian = HermitianMatrix<f64>;
pub type Eigen = EigenDecomposition<f64>;
pub type States = Ensemble<f64>;
pub type Mat = CMatrix<f64>;
pub type Vector = CVector<f64>;
pub type C64 = Complex<f64>;
