//! Closed-form continuity bounds as evaluable formulas.
//!
//! Each entry is looked up by id, reads the fields of a [`BoundInput`] it
//! needs, and returns a [`BoundValue`]: the number in nats, the free
//! parameters it settled on, and whether the input lies inside the entry's
//! stated validity domain.

mod eval;
pub mod input;
pub mod optimize;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::evaluate_bound;
pub use input::{
    BoundInput, CbtPreset, ClassParams, Constrained, Delta, DeltaOrigin, Flavor, GFunction, Hamiltonian,
};
pub use optimize::{
    cb_t_bound, cb_t_preset, cb_t_value, cbt_parameters, log_scan_minimize, optimize_winter_parameter, vb_mt_bound, vb_value,
    WinterShape, WINTER_EOF, WINTER_EOF_REG, WINTER_QCE, WINTER_QCMI,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("unknown bound id {0:?}")]
    UnknownId(String),
    #[error("missing input field `{0}`")]
    Missing(&'static str),
    #[error("this bound requires a {0}")]
    Origin(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Energy(#[from] energy_gibbs::EnergyError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    /// `+inf` marks a formula that diverges at the input.
    pub value: f64,
    pub chosen_params: BTreeMap<String, f64>,
    pub valid: bool,
    pub validity_reason: String,
}

impl BoundValue {
    pub fn valid(value: f64, chosen_params: BTreeMap<String, f64>) -> Self {
        Self { value, chosen_params, valid: true, validity_reason: String::new() }
    }

    pub fn of(value: f64) -> Self {
        Self::valid(value, BTreeMap::new())
    }

    pub fn flagged(mut self, reason: impl Into<String>) -> Self {
        self.valid = false;
        self.validity_reason = reason.into();
        self
    }

    pub(crate) fn with(mut self, key: &str, v: f64) -> Self {
        self.chosen_params.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub id: String,
    pub formula_text: String,
    pub domain_text: String,
    pub paper_anchor: String,
}

/// The registry, in listing order.
pub fn catalog() -> &'static [BoundEntry] {
    static CATALOG: OnceLock<Vec<BoundEntry>> = OnceLock::new();
    CATALOG.get_or_init(|| serde_json::from_str(include_str!("../data/catalog.json")).expect("catalog data parses"))
}

/// Case-insensitive lookup.
pub fn entry(id: &str) -> Option<&'static BoundEntry> {
    catalog().iter().find(|e| e.id.eq_ignore_ascii_case(id))
}

pub fn catalog_json() -> String {
    serde_json::to_string_pretty(catalog()).expect("catalog serializes")
}
