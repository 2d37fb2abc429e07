use std::collections::BTreeMap;

use entropic::{binary_entropy, conditional_entropy, conditional_mutual_information, CondForm};
use qstate_core::{
    chaotic, cq_state, eigh_matrix, kron, maximally_entangled, partial_trace, qc_state, tensor, trace_distance, Density,
    Ensemble, Mat, StateJson, SystemLayout, C64,
};
use serde::Serialize;

use crate::{AfwError, AfwResult};

/// Which difference a witness is about. Labels are fixed: `A`, `B` and,
/// for the conditional mutual information, `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessQuantity {
    /// `S(A|B)_sigma - S(A|B)_rho`.
    ConditionalEntropy,
    /// `I(A:B|C)_sigma - I(A:B|C)_rho`.
    ConditionalMutualInformation,
    /// `C_B(rho) - C_B(sigma)`; needs a measurement optimizer to evaluate.
    ClassicalCorrelation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPair {
    pub rho: Density,
    pub sigma: Density,
    pub claimed_lhs: f64,
    pub bound_id: String,
    /// The LHS is claimed to equal the bound's value at `params`.
    pub claimed_equality: bool,
    pub quantity: WitnessQuantity,
    pub params: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    bound_id: &'a str,
    quantity: WitnessQuantity,
    claimed_lhs: f64,
    claimed_equality: bool,
    params: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Export<'a> {
    rho: StateJson,
    sigma: StateJson,
    metadata: Metadata<'a>,
}

impl WitnessPair {
    /// The LHS recomputed from the states, when no optimization is needed.
    pub fn measured_lhs(&self) -> AfwResult<Option<f64>> {
        let v = match self.quantity {
            WitnessQuantity::ConditionalEntropy => {
                let ce = |s: &Density| conditional_entropy(s, &["A"], &["B"], CondForm::Difference);
                ce(&self.sigma)? - ce(&self.rho)?
            }
            WitnessQuantity::ConditionalMutualInformation => {
                let cmi = |s: &Density| conditional_mutual_information(s, &["A"], &["B"], &["C"]);
                cmi(&self.sigma)? - cmi(&self.rho)?
            }
            WitnessQuantity::ClassicalCorrelation => return Ok(None),
        };
        Ok(Some(v))
    }

    pub fn distance(&self) -> AfwResult<f64> {
        Ok(trace_distance(&self.rho, &self.sigma)?)
    }

    /// `{rho, sigma, metadata: {bound_id, claimed_lhs, params, ..}}`, states
    /// in the usual state-file format.
    pub fn to_json(&self) -> String {
        let e = Export {
            rho: StateJson::from(&self.rho),
            sigma: StateJson::from(&self.sigma),
            metadata: Metadata {
                bound_id: &self.bound_id,
                quantity: self.quantity,
                claimed_lhs: self.claimed_lhs,
                claimed_equality: self.claimed_equality,
                params: &self.params,
            },
        };
        serde_json::to_string(&e).expect("witness serializes")
    }
}

fn params(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn h2(x: f64) -> AfwResult<f64> {
    Ok(binary_entropy(x)?)
}

/// `eps ln(n-1) + h2(eps)`, the common value of the Wilde-type witnesses.
fn wilde_value(n: usize, eps: f64) -> AfwResult<f64> {
    Ok(eps * ((n - 1) as f64).ln() + h2(eps)?)
}

/// `n` orthogonal pure states and their depolarized versions
/// `(1-p) rho_i + (p/n) I`, `p = eps / (1 - 1/n)`, all with weight 1/n.
fn depolarized_ensembles(n: usize, eps: f64, label: &str) -> AfwResult<(Ensemble<f64>, Ensemble<f64>)> {
    if n < 2 {
        return Err(AfwError::Domain(format!("witness needs n >= 2, got {n}")));
    }
    let edge = 1.0 - 1.0 / n as f64;
    if !(0.0..=edge + 1e-12).contains(&eps) {
        return Err(AfwError::Domain(format!("eps = {eps} outside [0, 1 - 1/n = {edge}]")));
    }
    let eps = eps.min(edge);
    let p = eps / edge;
    let layout = SystemLayout::single(label, n)?;
    let w = 1.0 / n as f64;
    let mut rhos = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    for i in 0..n {
        let mut diag = vec![p / n as f64; n];
        diag[i] += 1.0 - p;
        rhos.push((w, Density::basis(i, layout.clone())?));
        sigmas.push((w, Density::from_diagonal(&diag, layout.clone())?));
    }
    Ok((Ensemble::new(rhos)?, Ensemble::new(sigmas)?))
}

/// q-c pair on which `eps ln(n-1) + h2(eps)` is attained by the conditional
/// entropy, for `0 <= eps <= 1 - 1/n`.
pub fn wilde_witness(n: usize, eps: f64) -> AfwResult<WitnessPair> {
    let (r, s) = depolarized_ensembles(n, eps, "A")?;
    Ok(WitnessPair {
        rho: qc_state(&r, "B")?,
        sigma: qc_state(&s, "B")?,
        claimed_lhs: wilde_value(n, eps)?,
        bound_id: "qce-wilde-qc".into(),
        claimed_equality: true,
        quantity: WitnessQuantity::ConditionalEntropy,
        params: params(&[("n", n as f64), ("epsilon", eps)]),
    })
}

/// c-q pair (register `A` first) attaining the one-sided bound.
pub fn cq_witness(n: usize, eps: f64) -> AfwResult<WitnessPair> {
    let (r, s) = depolarized_ensembles(n, eps, "B")?;
    Ok(WitnessPair {
        rho: cq_state(&r, "A")?,
        sigma: cq_state(&s, "A")?,
        claimed_lhs: wilde_value(n, eps)?,
        bound_id: "qce-cq-oneside".into(),
        claimed_equality: true,
        quantity: WitnessQuantity::ConditionalEntropy,
        params: params(&[("n", n as f64), ("epsilon", eps)]),
    })
}

/// Maximally entangled vs chaotic: both C_B and D_B drop by `ln d` at
/// distance `1 - 1/d^2`.
pub fn discord_witness(d: usize) -> AfwResult<WitnessPair> {
    let rho = maximally_entangled::<f64>(d)?;
    let sigma = chaotic::<f64>(rho.layout());
    let n = (d * d) as f64;
    Ok(WitnessPair {
        rho,
        sigma,
        claimed_lhs: (d as f64).ln(),
        bound_id: "cb-da".into(),
        claimed_equality: false,
        quantity: WitnessQuantity::ClassicalCorrelation,
        params: params(&[("d", d as f64), ("epsilon", 1.0 - 1.0 / n)]),
    })
}

/// `rho = (1/d) sum_i |ii><ii|` against `rho_A (x) rho_B`: `C_B(rho) = ln d`
/// equals the C-UP bound at `Delta = 1 - 1/d`.
pub fn cup_witness(d: usize) -> AfwResult<WitnessPair> {
    if d < 2 {
        return Err(AfwError::Domain(format!("witness needs d >= 2, got {d}")));
    }
    let layout = SystemLayout::new([("A", d), ("B", d)])?;
    let mut p = vec![0.0; d * d];
    for i in 0..d {
        p[i * d + i] = 1.0 / d as f64;
    }
    let rho = Density::from_diagonal(&p, layout)?;
    let sigma = tensor(&partial_trace(&rho, &["A"])?, &partial_trace(&rho, &["B"])?)?;
    let delta = product_distance(&rho)?;
    Ok(WitnessPair {
        rho,
        sigma,
        claimed_lhs: (d as f64).ln(),
        bound_id: "c-up".into(),
        claimed_equality: true,
        quantity: WitnessQuantity::ClassicalCorrelation,
        params: params(&[("d", d as f64), ("delta_star", delta)]),
    })
}

fn bipartite_labels(rho: &Density) -> AfwResult<(String, String)> {
    let labels = rho.layout().labels();
    if labels.len() != 2 {
        return Err(AfwError::Domain(format!("expected a bipartite layout, got {}", rho.layout().describe())));
    }
    Ok((labels[0].to_string(), labels[1].to_string()))
}

/// `Delta(rho) = 1/2 ||rho - rho_A (x) rho_B||_1`, an upper bound on the
/// `Delta*` of the C-UP bound.
pub fn product_distance(rho: &Density) -> AfwResult<f64> {
    let (a, b) = bipartite_labels(rho)?;
    let prod = tensor(&partial_trace(rho, &[&a])?, &partial_trace(rho, &[&b])?)?;
    Ok(trace_distance(rho, &prod)?)
}

/// Upper estimate of `Upsilon(rho)` (the D-UP distance): dephase B in an
/// eigenbasis of `rho_B`, which gives a member of the q-c family the
/// infimum runs over.
pub fn upsilon_upper(rho: &Density) -> AfwResult<f64> {
    let (_, b) = bipartite_labels(rho)?;
    let dims = rho.layout().dims();
    let (da, db) = (dims[0], dims[1]);
    let basis = eigh_matrix(partial_trace(rho, &[&b])?.matrix()).eigenvectors;
    let w: Mat = kron(&Mat::identity(da, da), &basis);
    let mut inner: Mat = w.adjoint() * rho.matrix() * &w;
    for r in 0..da * db {
        for c in 0..da * db {
            if r % db != c % db {
                inner[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    let sigma = Density::from_matrix_unchecked(&w * inner * w.adjoint(), rho.layout().clone());
    Ok(trace_distance(rho, &sigma)?)
}
