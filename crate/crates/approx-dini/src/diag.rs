//! States of a sequence: diagonal states stored as runs (so dimension 2^20
//! costs nothing) or dense matrices.

use entropic::{eta, mutual_information, von_neumann_entropy};
use qstate_core::{eigvalsh, trace_distance, Density};

use crate::{DiniError, DiniResult};

/// Diagonal state in a fixed basis, as `(value, count)` runs in basis
/// order. Entries past the last run are zero, so states of different
/// dimension live in one space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagState {
    runs: Vec<(f64, usize)>,
}

impl DiagState {
    pub fn new(runs: Vec<(f64, usize)>) -> DiniResult<Self> {
        if runs.iter().any(|&(v, _)| !(v.is_finite() && v >= 0.0)) {
            return Err(DiniError::Spec(
                "diagonal entries must be finite and >= 0".into(),
            ));
        }
        let tr: f64 = runs.iter().map(|&(v, c)| v * c as f64).sum();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(DiniError::Spec(format!("diagonal state has trace {tr}")));
        }
        Ok(Self {
            runs: runs.into_iter().filter(|&(_, c)| c > 0).collect(),
        })
    }

    pub fn from_probabilities(p: &[f64]) -> DiniResult<Self> {
        Self::new(p.iter().map(|&v| (v, 1)).collect())
    }

    pub fn runs(&self) -> &[(f64, usize)] {
        &self.runs
    }

    pub fn dim(&self) -> usize {
        self.runs.iter().map(|&(_, c)| c).sum()
    }

    pub fn entropy(&self) -> f64 {
        self.runs.iter().map(|&(v, c)| c as f64 * eta(v)).sum()
    }

    /// Eigenvalues as `(value, multiplicity)`, nonincreasing, zeros dropped.
    pub fn spectrum(&self) -> Vec<(f64, usize)> {
        let mut s: Vec<(f64, usize)> = self
            .runs
            .iter()
            .copied()
            .filter(|&(v, _)| v > 0.0)
            .collect();
        s.sort_by(|a, b| b.0.total_cmp(&a.0));
        s
    }

    /// Pointwise `f(a_i, b_i)` over the union of both supports.
    pub fn zip_runs(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Vec<(f64, usize)> {
        let (mut i, mut j) = (0, 0);
        let (mut left_i, mut left_j) = (
            self.runs.first().map_or(0, |r| r.1),
            other.runs.first().map_or(0, |r| r.1),
        );
        let mut out = Vec::new();
        while i < self.runs.len() || j < other.runs.len() {
            let a = if i < self.runs.len() {
                Some(self.runs[i].0)
            } else {
                None
            };
            let b = if j < other.runs.len() {
                Some(other.runs[j].0)
            } else {
                None
            };
            let len = match (a, b) {
                (Some(_), Some(_)) => left_i.min(left_j),
                (Some(_), None) => left_i,
                (None, Some(_)) => left_j,
                (None, None) => break,
            };
            out.push((f(a.unwrap_or(0.0), b.unwrap_or(0.0)), len));
            if a.is_some() {
                left_i -= len;
                if left_i == 0 {
                    i += 1;
                    left_i = self.runs.get(i).map_or(0, |r| r.1);
                }
            }
            if b.is_some() {
                left_j -= len;
                if left_j == 0 {
                    j += 1;
                    left_j = other.runs.get(j).map_or(0, |r| r.1);
                }
            }
        }
        out
    }

    pub fn distance(&self, other: &Self) -> f64 {
        0.5 * self
            .zip_runs(other, |a, b| (a - b).abs())
            .iter()
            .map(|&(v, c)| v * c as f64)
            .sum::<f64>()
    }

    /// `p self + (1 - p) other`.
    pub fn mix(&self, other: &Self, p: f64) -> DiniResult<Self> {
        Self::new(self.zip_runs(other, |a, b| p * a + (1.0 - p) * b))
    }

    /// `w self (+) (1 - w) |x><x|` with `x` past the support.
    pub fn with_flag(&self, w: f64) -> DiniResult<Self> {
        let mut runs: Vec<(f64, usize)> = self.runs.iter().map(|&(v, c)| (w * v, c)).collect();
        runs.push((1.0 - w, 1));
        Self::new(runs)
    }
}

#[derive(Debug, Clone)]
pub enum SeqState {
    Diagonal(DiagState),
    Dense(Density),
}

impl SeqState {
    pub fn entropy(&self) -> f64 {
        match self {
            SeqState::Diagonal(d) => d.entropy(),
            SeqState::Dense(r) => von_neumann_entropy(r),
        }
    }

    pub fn spectrum(&self) -> Vec<(f64, usize)> {
        match self {
            SeqState::Diagonal(d) => d.spectrum(),
            SeqState::Dense(r) => eigvalsh(r.matrix())
                .into_iter()
                .filter(|&v| v > 0.0)
                .map(|v| (v, 1))
                .collect(),
        }
    }

    pub fn distance(&self, other: &Self) -> DiniResult<f64> {
        match (self, other) {
            (SeqState::Diagonal(a), SeqState::Diagonal(b)) => Ok(a.distance(b)),
            (SeqState::Dense(a), SeqState::Dense(b)) => Ok(trace_distance(a, b)?),
            _ => Err(DiniError::Spec(
                "cannot compare a diagonal and a dense state".into(),
            )),
        }
    }

    pub fn mix(&self, other: &Self, p: f64) -> DiniResult<Self> {
        match (self, other) {
            (SeqState::Diagonal(a), SeqState::Diagonal(b)) => Ok(SeqState::Diagonal(a.mix(b, p)?)),
            (SeqState::Dense(a), SeqState::Dense(b)) => Ok(SeqState::Dense(a.mix(b, p)?)),
            _ => Err(DiniError::Spec(
                "cannot mix a diagonal and a dense state".into(),
            )),
        }
    }

    /// Smallest eigenvalue of `tau - c self`.
    pub fn domination_gap(&self, tau: &Self, c: f64) -> DiniResult<f64> {
        match (self, tau) {
            (SeqState::Diagonal(r), SeqState::Diagonal(t)) => Ok(t
                .zip_runs(r, |tv, rv| tv - c * rv)
                .iter()
                .map(|&(v, _)| v)
                .fold(0.0f64, f64::min)),
            (SeqState::Dense(r), SeqState::Dense(t)) => {
                let diff = t.matrix() - r.matrix() * qstate_core::C64::new(c, 0.0);
                Ok(eigvalsh(&diff).last().copied().unwrap_or(0.0))
            }
            _ => Err(DiniError::Spec(
                "cannot compare a diagonal and a dense state".into(),
            )),
        }
    }

    /// `I(A:B)` across the first two parts of a dense state.
    pub fn qmi(&self) -> DiniResult<f64> {
        match self {
            SeqState::Dense(r) => {
                let l = r.layout().labels();
                if l.len() != 2 {
                    return Err(DiniError::Spec(format!(
                        "QMI needs a bipartite state, got {}",
                        r.layout().describe()
                    )));
                }
                Ok(mutual_information(r, &[l[0]], &[l[1]])?)
            }
            SeqState::Diagonal(_) => {
                Err(DiniError::Spec("QMI needs a dense bipartite state".into()))
            }
        }
    }
}
