//! Designed sequences `rho_n -> rho_0`, described by `{kind, params, n_grid}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diag::{DiagState, SeqState};
use crate::{DiniError, DiniResult};

/// Largest `log2` dimension of the diagonal constructions.
pub const MAX_LOG2_DIM: u32 = 20;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SequenceSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub n_grid: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct StateSequence {
    pub limit: SeqState,
    /// `(n, rho_n)` in increasing `n`.
    pub terms: Vec<(u32, SeqState)>,
}

impl StateSequence {
    pub fn new(limit: SeqState, mut terms: Vec<(u32, SeqState)>) -> DiniResult<Self> {
        if terms.is_empty() {
            return Err(DiniError::Spec("a sequence needs at least one term".into()));
        }
        terms.sort_by_key(|t| t.0);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(DiniError::Spec("repeated n in the grid".into()));
        }
        Ok(Self { limit, terms })
    }

    pub fn n_grid(&self) -> Vec<u32> {
        self.terms.iter().map(|t| t.0).collect()
    }

    /// Errors when the distance to the limit grows anywhere along the grid.
    pub fn check_convergent(&self) -> DiniResult<Vec<f64>> {
        let d: Vec<f64> = self
            .terms
            .iter()
            .map(|(_, s)| s.distance(&self.limit))
            .collect::<DiniResult<_>>()?;
        for (k, w) in d.windows(2).enumerate() {
            if w[1] > w[0] + 1e-12 {
                return Err(DiniError::NotConvergent {
                    n: self.terms[k + 1].0,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        Ok(d)
    }
}

/// `(1 - p)|0><0| + p I_d / d`.
fn spike(p: f64, d: usize) -> DiniResult<DiagState> {
    if d == 1 {
        return DiagState::new(vec![(1.0, 1)]);
    }
    let x = p / d as f64;
    DiagState::new(vec![(1.0 - p + x, 1), (x, d - 1)])
}

fn param(spec: &SequenceSpec, key: &str, default: Option<f64>) -> DiniResult<f64> {
    spec.params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| DiniError::Spec(format!("{}: missing param {key}", spec.kind)))
}

/// `rho_n = (1 - p_n)|0><0| + p_n I/d_n`, `d_n = 2^n`, `p_n = c / ln d_n`;
/// `S(rho_n) -> c` while `rho_n -> |0><0|`.
fn jump_terms(c: f64, grid: &[u32]) -> DiniResult<Vec<(u32, DiagState)>> {
    if !(c.is_finite() && c > 0.0) {
        return Err(DiniError::Spec(format!("jump needs c > 0, got {c}")));
    }
    grid.iter()
        .map(|&n| {
            if n == 0 || n > MAX_LOG2_DIM {
                return Err(DiniError::Spec(format!(
                    "jump needs 1 <= n <= {MAX_LOG2_DIM}, got {n}"
                )));
            }
            let d = 1usize << n;
            let p = c / (d as f64).ln();
            if p > 1.0 {
                return Err(DiniError::Spec(format!("p_n = c / ln 2^{n} = {p} > 1")));
            }
            Ok((n, spike(p, d)?))
        })
        .collect()
}

impl SequenceSpec {
    pub fn new(kind: &str, params: &[(&str, f64)], n_grid: Vec<u32>) -> Self {
        Self {
            kind: kind.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            n_grid,
        }
    }

    /// Kinds:
    /// - `jump {c}`: the spike sequence above.
    /// - `dominating {c, weight}`: `w rho_n (+) (1 - w)|x><x|` over the jump
    ///   sequence, with `x` orthogonal to every `rho_n`.
    /// - `convergent {dim = 4, base = 0}`: fixed dimension,
    ///   `rho_n = (1 - 2^-n) rho_0 + 2^-n I/dim` with `rho_0` the spike of
    ///   weight `base`.
    pub fn build(&self) -> DiniResult<StateSequence> {
        let one = DiagState::new(vec![(1.0, 1)])?;
        let (limit, terms) = match self.kind.as_str() {
            "jump" => (one, jump_terms(param(self, "c", None)?, &self.n_grid)?),
            "dominating" => {
                let w = param(self, "weight", None)?;
                if !(0.0..=1.0).contains(&w) || w == 0.0 {
                    return Err(DiniError::Spec(format!(
                        "weight must be in (0, 1], got {w}"
                    )));
                }
                let t = jump_terms(param(self, "c", None)?, &self.n_grid)?;
                let t = t
                    .into_iter()
                    .map(|(n, s)| Ok((n, s.with_flag(w)?)))
                    .collect::<DiniResult<_>>()?;
                (one.with_flag(w)?, t)
            }
            "convergent" => {
                let dim = param(self, "dim", Some(4.0))?;
                if !(dim >= 1.0 && dim.fract() == 0.0 && dim <= (1u64 << MAX_LOG2_DIM) as f64) {
                    return Err(DiniError::Spec(format!(
                        "dim must be a positive integer <= 2^{MAX_LOG2_DIM}"
                    )));
                }
                let dim = dim as usize;
                let limit = spike(param(self, "base", Some(0.0))?, dim)?;
                let flat = DiagState::new(vec![(1.0 / dim as f64, dim)])?;
                let terms = self
                    .n_grid
                    .iter()
                    .map(|&n| Ok((n, flat.mix(&limit, 0.5f64.powi(n as i32))?)))
                    .collect::<DiniResult<_>>()?;
                (limit, terms)
            }
            other => return Err(DiniError::Spec(format!("unknown sequence kind {other}"))),
        };
        StateSequence::new(
            SeqState::Diagonal(limit),
            terms
                .into_iter()
                .map(|(n, s)| (n, SeqState::Diagonal(s)))
                .collect(),
        )
    }
}

/// Qubit blocks `rho_n = diag(1 - a_n, a_n, 0, 0)`, `sigma_n = diag(0, 0, b_n,
/// 1 - b_n)` with `a_n -> 0.3`, `b_n -> 0.2` and weights
/// `p_n = p_0 + (1 - p_0) 2^-n`. Returns `(rho, sigma, p_n, p_0)`.
pub fn designed_mixture(
    n_grid: &[u32],
    p0: f64,
) -> DiniResult<(StateSequence, StateSequence, Vec<f64>, f64)> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(DiniError::Spec(format!("p_0 must be in [0, 1], got {p0}")));
    }
    let rho =
        |a: f64| DiagState::from_probabilities(&[1.0 - a, a, 0.0, 0.0]).map(SeqState::Diagonal);
    let sigma =
        |b: f64| DiagState::from_probabilities(&[0.0, 0.0, b, 1.0 - b]).map(SeqState::Diagonal);
    let t = |n: u32| 0.5f64.powi(n as i32);
    let r = StateSequence::new(
        rho(0.3)?,
        n_grid
            .iter()
            .map(|&n| Ok((n, rho(0.3 + 0.2 * t(n))?)))
            .collect::<DiniResult<_>>()?,
    )?;
    let s = StateSequence::new(
        sigma(0.2)?,
        n_grid
            .iter()
            .map(|&n| Ok((n, sigma(0.2 - 0.1 * t(n))?)))
            .collect::<DiniResult<_>>()?,
    )?;
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    let p = grid.iter().map(|&n| p0 + (1.0 - p0) * t(n)).collect();
    Ok((r, s, p, p0))
}
