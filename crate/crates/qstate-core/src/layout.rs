use serde::{Deserialize, Serialize};

use crate::error::{QError, QResult};
use crate::MAX_DIM;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Part {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Part>", into = "Vec<Part>")]
pub struct SystemLayout {
    parts: Vec<Part>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> QResult<Self> {
        let parts: Vec<Part> = parts
            .into_iter()
            .map(|(l, d)| Part { label: l.into(), dim: d })
            .collect();
        Self::from_parts(parts)
    }

    fn from_parts(parts: Vec<Part>) -> QResult<Self> {
        if parts.is_empty() {
            return Err(QError::InvalidLayout("no subsystems".into()));
        }
        let mut total: usize = 1;
        for (i, p) in parts.iter().enumerate() {
            if p.dim == 0 {
                return Err(QError::InvalidLayout(format!("subsystem '{}' has dim 0", p.label)));
            }
            if p.label.is_empty() {
                return Err(QError::InvalidLayout("empty label".into()));
            }
            if parts[..i].iter().any(|q| q.label == p.label) {
                return Err(QError::LabelCollision(p.label.clone()));
            }
            total = total.checked_mul(p.dim).ok_or(QError::TooLarge(usize::MAX))?;
        }
        if total > MAX_DIM {
            return Err(QError::TooLarge(total));
        }
        Ok(Self { parts })
    }

    pub fn single(label: &str, dim: usize) -> QResult<Self> {
        Self::new([(label, dim)])
    }

    /// Layout with default labels A, B, C, ...
    pub fn from_dims(dims: &[usize]) -> QResult<Self> {
        Self::new(dims.iter().enumerate().map(|(i, &d)| (default_label(i), d)))
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim).product()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.label == label)
    }

    pub fn dim_of(&self, label: &str) -> QResult<usize> {
        self.index_of(label)
            .map(|i| self.parts[i].dim)
            .ok_or_else(|| QError::UnknownLabel(label.to_string()))
    }

    /// Product of the dims of the listed labels.
    pub fn dim_of_set(&self, labels: &[&str]) -> QResult<usize> {
        labels.iter().try_fold(1usize, |acc, l| Ok(acc * self.dim_of(l)?))
    }

    pub fn concat(&self, other: &SystemLayout) -> QResult<Self> {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Self::from_parts(parts)
    }

    /// Boolean mask over parts for the labels in `keep`; errors on unknown labels.
    pub fn mask(&self, keep: &[&str]) -> QResult<Vec<bool>> {
        let mut mask = vec![false; self.parts.len()];
        for l in keep {
            let i = self.index_of(l).ok_or_else(|| QError::UnknownLabel(l.to_string()))?;
            mask[i] = true;
        }
        Ok(mask)
    }

    /// Sub-layout of the masked parts, in layout order.
    pub fn select(&self, mask: &[bool]) -> QResult<Self> {
        Self::from_parts(
            self.parts
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(p, _)| p.clone())
                .collect(),
        )
    }

    pub fn describe(&self) -> String {
        self.parts
            .iter()
            .map(|p| format!("{}:{}", p.label, p.dim))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl TryFrom<Vec<Part>> for SystemLayout {
    type Error = QError;
    fn try_from(parts: Vec<Part>) -> QResult<Self> {
        Self::from_parts(parts)
    }
}

impl From<SystemLayout> for Vec<Part> {
    fn from(l: SystemLayout) -> Self {
        l.parts
    }
}

pub fn default_label(i: usize) -> String {
    const L: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if i < L.len() {
        (L[i] as char).to_string()
    } else {
        format!("A{}", i + 1)
    }
}
