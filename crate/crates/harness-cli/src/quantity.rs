//! Quantities with a computable LHS, and which catalog entries they certify.

use std::fmt;
use std::str::FromStr;

use bound_catalog::DeltaOrigin;
use entropic::{
    conditional_entropy, conditional_mutual_information, marginal_entropy, multipartite_cmi, multipartite_mi,
    mutual_information, shannon, von_neumann_entropy, CondForm, PartitionSpec,
};
use qstate_core::{partial_trace, Density, Mat};
use roof_opt::{classical_correlation, discord, eof_roof, RoofOptions};

use crate::sampler::PairFlavor;
use crate::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `S` of the whole state.
    Entropy,
    /// `S(A|rest)`.
    CondEntropy,
    /// `S(A|rest)_sigma - S(A|rest)_rho`.
    CondEntropyOneSided,
    /// `chi(rho) - chi(sigma)` for the ensemble read off a classical `A`.
    Holevo,
    /// `Tr M rho` for a fixed Hermitian `M` per cell.
    Observable,
    /// `I(A:rest)`.
    Qmi,
    /// `I(A:B|rest)`.
    Qcmi,
    /// `I(A_1:...:A_n)` over all systems.
    Mqmi,
    /// `I(A_1:...:A_{n-1}|A_n)`.
    Mqcmi,
    /// `S(rho_A)`: `E_F`, its regularization and `E_sq` of pure states.
    EntanglementEntropy,
    /// `C_B = I(A:B)` when `B` is classical.
    ClassicalCorrelationQc,
    /// `D_B = 0` when `B` is classical.
    DiscordQc,
    EofEstimate,
    ClassicalCorrelationEstimate,
    DiscordEstimate,
}

impl Quantity {
    pub const ALL: &'static [Quantity] = &[
        Quantity::Entropy,
        Quantity::CondEntropy,
        Quantity::CondEntropyOneSided,
        Quantity::Holevo,
        Quantity::Observable,
        Quantity::Qmi,
        Quantity::Qcmi,
        Quantity::Mqmi,
        Quantity::Mqcmi,
        Quantity::EntanglementEntropy,
        Quantity::ClassicalCorrelationQc,
        Quantity::DiscordQc,
        Quantity::EofEstimate,
        Quantity::ClassicalCorrelationEstimate,
        Quantity::DiscordEstimate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Entropy => "entropy",
            Quantity::CondEntropy => "cond-entropy",
            Quantity::CondEntropyOneSided => "cond-entropy-oneside",
            Quantity::Holevo => "holevo",
            Quantity::Observable => "observable",
            Quantity::Qmi => "qmi",
            Quantity::Qcmi => "qcmi",
            Quantity::Mqmi => "mqmi",
            Quantity::Mqcmi => "mqcmi",
            Quantity::EntanglementEntropy => "ent-entropy",
            Quantity::ClassicalCorrelationQc => "cb-qc",
            Quantity::DiscordQc => "db-qc",
            Quantity::EofEstimate => "eof-roof",
            Quantity::ClassicalCorrelationEstimate => "cb-opt",
            Quantity::DiscordEstimate => "db-opt",
        }
    }

    /// Estimate-based LHS: reported, never counted as a violation.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Quantity::EofEstimate | Quantity::ClassicalCorrelationEstimate | Quantity::DiscordEstimate)
    }

    pub fn one_sided(&self) -> bool {
        matches!(self, Quantity::CondEntropyOneSided | Quantity::Holevo)
    }

    pub fn min_systems(&self) -> usize {
        match self {
            Quantity::Entropy | Quantity::Observable => 1,
            Quantity::Qcmi | Quantity::Mqcmi => 3,
            _ => 2,
        }
    }

    /// Required flavors; empty means any.
    pub fn flavors(&self) -> &'static [PairFlavor] {
        match self {
            Quantity::EntanglementEntropy => &[PairFlavor::Pure],
            Quantity::ClassicalCorrelationQc | Quantity::DiscordQc => &[PairFlavor::Qc, PairFlavor::Classical],
            Quantity::Holevo | Quantity::CondEntropyOneSided => &[PairFlavor::Classical],
            _ => &[],
        }
    }

    /// The dims list the catalog entry reads.
    pub fn bound_dims(&self, dims: &[usize]) -> Vec<usize> {
        match self {
            Quantity::Entropy | Quantity::Observable => vec![dims.iter().product()],
            Quantity::Mqcmi => dims[..dims.len() - 1].to_vec(),
            Quantity::Holevo => vec![dims[0]],
            _ => dims.to_vec(),
        }
    }

    fn labels(rho: &Density) -> Vec<String> {
        rho.layout().labels().into_iter().map(String::from).collect()
    }

    /// `f(rho)`; `observable` needs `m`.
    pub fn value(&self, rho: &Density, m: Option<&Mat>) -> HarnessResult<f64> {
        let l = Self::labels(rho);
        let l: Vec<&str> = l.iter().map(String::as_str).collect();
        let opts = RoofOptions::with_restarts(1, 0);
        Ok(match self {
            Quantity::Entropy => von_neumann_entropy(rho),
            Quantity::CondEntropy | Quantity::CondEntropyOneSided => {
                conditional_entropy(rho, &l[..1], &l[1..], CondForm::Difference)?
            }
            Quantity::Holevo | Quantity::Qmi | Quantity::ClassicalCorrelationQc => {
                mutual_information(rho, &l[..1], &l[1..])?
            }
            Quantity::Observable => {
                let m = m.ok_or_else(|| HarnessError::Usage("observable quantity needs an operator".into()))?;
                (m * rho.matrix()).trace().re
            }
            Quantity::Qcmi => conditional_mutual_information(rho, &l[..1], &l[1..2], &l[2..])?,
            Quantity::Mqmi => multipartite_mi(rho, &PartitionSpec::singletons(&l, None)?)?,
            Quantity::Mqcmi => {
                let n = l.len();
                multipartite_cmi(rho, &PartitionSpec::singletons(&l[..n - 1], Some(&l[n - 1..]))?)?
            }
            Quantity::EntanglementEntropy => marginal_entropy(rho, &l[..1])?,
            Quantity::DiscordQc => 0.0,
            Quantity::EofEstimate => eof_roof(rho, l[0], rho.dim(), &opts)?.value,
            Quantity::ClassicalCorrelationEstimate | Quantity::DiscordEstimate => {
                let db = rho.layout().dims()[1];
                let rest = bipartite(rho)?;
                if *self == Quantity::DiscordEstimate {
                    discord(&rest, "B", db * db, &opts)?.value
                } else {
                    classical_correlation(&rest, "B", db * db, &opts)?.value
                }
            }
        })
    }

    /// `|f(rho) - f(sigma)|`, or the signed difference of a one-sided bound.
    pub fn lhs(&self, rho: &Density, sigma: &Density, m: Option<&Mat>) -> HarnessResult<f64> {
        let (a, b) = (self.value(rho, m)?, self.value(sigma, m)?);
        Ok(match self {
            Quantity::CondEntropyOneSided => b - a,
            Quantity::Holevo => a - b,
            _ => (a - b).abs(),
        })
    }
}

// Estimators take exactly two systems.
fn bipartite(rho: &Density) -> HarnessResult<Density> {
    if rho.layout().len() != 2 {
        return Err(HarnessError::Incompatible("estimates need a bipartite layout".into()));
    }
    Ok(rho.clone())
}

/// `H(p) - H(q)` for the distributions of a classical first system.
pub fn register_entropy_gap(rho: &Density, sigma: &Density) -> HarnessResult<f64> {
    let l = rho.layout().labels()[0].to_string();
    let diag = |s: &Density| -> HarnessResult<Vec<f64>> {
        let a = partial_trace(s, &[&l])?;
        Ok((0..a.dim()).map(|i| a.matrix()[(i, i)].re).collect())
    };
    Ok(shannon(&diag(rho)?) - shannon(&diag(sigma)?))
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        Quantity::ALL
            .iter()
            .copied()
            .find(|q| q.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown quantity {s:?}")))
    }
}

/// What a catalog entry can be certified with.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub bound_id: &'static str,
    /// The first one is the default.
    pub quantities: &'static [Quantity],
    /// Allowed flavors; empty means any.
    pub flavors: &'static [PairFlavor],
    pub needs_energy: bool,
    /// Origin of a delta parameter.
    pub origin: DeltaOrigin,
}

const ANY: &[PairFlavor] = &[];
const QC: &[PairFlavor] = &[PairFlavor::Qc, PairFlavor::Classical];
const PURE: &[PairFlavor] = &[PairFlavor::Pure];

/// `None` for entries without a computable LHS (class templates, the
/// advanced energy forms, regularized quantities of mixed states, ...).
pub fn pairing(bound_id: &str) -> Option<Pairing> {
    use Quantity::*;
    let p = |bound_id, quantities, flavors, needs_energy, origin| Pairing { bound_id, quantities, flavors, needs_energy, origin };
    let t = DeltaOrigin::Trace;
    let f = DeltaOrigin::Fidelity;
    let id = bound_catalog::entry(bound_id)?.id.as_str();
    Some(match id {
        "entropy-afw" => p("entropy-afw", &[Entropy], ANY, false, t),
        "entropy-audenaert" => p("entropy-audenaert", &[Entropy], ANY, false, t),
        "observable-span" => p("observable-span", &[Observable], ANY, false, t),
        "qce-afw" => p("qce-afw", &[CondEntropy], ANY, false, t),
        "qce-wilde-qc" => p("qce-wilde-qc", &[CondEntropy], QC, false, t),
        "qce-cq-oneside" => p("qce-cq-oneside", &[CondEntropyOneSided], &[PairFlavor::Classical], false, t),
        "holevo-oneside" => p("holevo-oneside", &[Holevo], &[PairFlavor::Classical], false, t),
        "qce-winter" => p("qce-winter", &[CondEntropy], ANY, true, t),
        "qce-purified" => p("qce-purified", &[CondEntropy], ANY, true, t),
        "qcmi" => p("qcmi", &[Qcmi], ANY, false, t),
        "qcmi-subspace" => p("qcmi-subspace", &[Qcmi], ANY, false, t),
        "qcmi-winter" => p("qcmi-winter", &[Qcmi], ANY, true, t),
        "qcmi-energy-fid" => p("qcmi-energy-fid", &[Qcmi], ANY, true, f),
        "mqmi" => p("mqmi", &[Mqmi], ANY, false, t),
        "mqcmi" => p("mqcmi", &[Mqcmi], ANY, false, t),
        "eof" => p("eof", &[EntanglementEntropy, EofEstimate], ANY, false, f),
        "eof-reg" => p("eof-reg", &[EntanglementEntropy, EofEstimate], ANY, false, t),
        "eof-winter" => p("eof-winter", &[EntanglementEntropy], PURE, true, t),
        "eof-winter-reg" => p("eof-winter-reg", &[EntanglementEntropy], PURE, true, t),
        "eof-purified" => p("eof-purified", &[EntanglementEntropy], PURE, true, f),
        "eof-purified-reg" => p("eof-purified-reg", &[EntanglementEntropy], PURE, true, t),
        "sq-ent" => p("sq-ent", &[EntanglementEntropy], PURE, false, f),
        "sq-ent-energy" => p("sq-ent-energy", &[EntanglementEntropy], PURE, true, f),
        "cb-da" => p("cb-da", &[ClassicalCorrelationQc, ClassicalCorrelationEstimate], ANY, false, t),
        "cb-db" => p("cb-db", &[ClassicalCorrelationQc, ClassicalCorrelationEstimate], ANY, false, t),
        "db-da" => p("db-da", &[DiscordQc, DiscordEstimate], ANY, false, t),
        "db-db" => p("db-db", &[DiscordQc, DiscordEstimate], ANY, false, t),
        "cb-energy" => p("cb-energy", &[ClassicalCorrelationQc], QC, true, t),
        "db-energy" => p("db-energy", &[DiscordQc], QC, true, t),
        "cb-energy-fid" => p("cb-energy-fid", &[ClassicalCorrelationQc], QC, true, f),
        "db-energy-fid" => p("db-energy-fid", &[DiscordQc], QC, true, f),
        _ => return None,
    })
}
