//! Optimization-defined correlation measures at small dimension: convex
//! roofs, one-way classical correlation and discord, the Holevo quantity of
//! the partial trace, and squashed-type estimates.
//!
//! Every result is an [`OptEstimate`] that says on which side of the true
//! value it lies. Nothing here is a certified optimum.

use qstate_core::{rng_from_seed, QError};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub mod chart;
pub mod measure;
pub mod roof;
pub mod simplex;
pub mod squashed;

pub use measure::{classical_correlation, discord};
pub use roof::{chi_partial_trace, eof_roof, koashi_winter_check, KoashiWinter};
pub use simplex::{minimize, SimplexConfig, SimplexResult};
pub use squashed::{c_squashed_estimate, c_squashed_from, squashed_upper};

#[derive(Debug, thiserror::Error)]
pub enum RoofError {
    #[error("layout: {0}")]
    Layout(String),
    #[error("{n_terms} terms cannot decompose a state of rank {rank}")]
    TooFewTerms { n_terms: usize, rank: usize },
    #[error("global state is not pure (largest eigenvalue {lambda_max})")]
    NotPure { lambda_max: f64 },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    State(#[from] QError),
    #[error(transparent)]
    Entropic(#[from] entropic::EntropicError),
}

pub type RoofResult<T> = Result<T, RoofError>;

/// Which side of the defined quantity an estimate lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Value of a feasible point of an infimum: never below the truth.
    #[serde(rename = "upper-of-inf")]
    UpperOfInf,
    /// Value of a feasible point of a supremum: never above the truth.
    #[serde(rename = "lower-of-sup")]
    LowerOfSup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptEstimate {
    pub value: f64,
    pub direction: Direction,
    pub restarts_used: usize,
    /// Chart coordinates of the best point; empty when no search ran.
    pub best_params: Vec<f64>,
    /// Whether the best restart met the stall criterion.
    pub converged: bool,
    /// Best value after each restart, in restart order.
    pub history: Vec<f64>,
    pub seed: u64,
}

impl OptEstimate {
    /// An exact value reached without search.
    pub fn exact(value: f64, direction: Direction) -> Self {
        Self { value, direction, restarts_used: 0, best_params: Vec::new(), converged: true, history: vec![value], seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RoofOptions {
    /// Random restarts, on top of the structured seed points.
    pub restarts: usize,
    pub seed: u64,
    /// Evaluation cap per restart; 0 picks one from the parameter count.
    pub max_evals: usize,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self { restarts: 32, seed: 0, max_evals: 0 }
    }
}

impl RoofOptions {
    pub fn with_restarts(restarts: usize, seed: u64) -> Self {
        Self { restarts, seed, ..Self::default() }
    }

    /// Independent stream for a sub-problem.
    pub fn child(&self, tag: u64) -> Self {
        Self { seed: splitmix(self.seed ^ splitmix(tag.wrapping_add(0x5eed))), ..*self }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of restart `index` under `master`.
pub fn restart_seed(master: u64, index: usize) -> u64 {
    splitmix(master ^ splitmix(index as u64))
}

/// Runs one local descent from each seed point and from `opts.restarts`
/// random points, in parallel, and reduces in index order so the result
/// does not depend on scheduling. `objective` is maximized for
/// `LowerOfSup` and minimized otherwise.
pub(crate) fn multistart<F>(
    n_params: usize,
    starts: Vec<Vec<f64>>,
    opts: &RoofOptions,
    direction: Direction,
    objective: F,
) -> OptEstimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sign = match direction {
        Direction::UpperOfInf => 1.0,
        Direction::LowerOfSup => -1.0,
    };
    let cfg = SimplexConfig {
        max_evals: if opts.max_evals > 0 { opts.max_evals } else { (400 * n_params).clamp(4_000, 60_000) },
        ..SimplexConfig::default()
    };
    let total = starts.len() + opts.restarts;
    let runs: Vec<SimplexResult> = (0..total)
        .into_par_iter()
        .map(|k| {
            let x0 = match starts.get(k) {
                Some(s) => s.clone(),
                None => {
                    let mut rng = rng_from_seed(restart_seed(opts.seed, k));
                    (0..n_params).map(|_| StandardNormal.sample(&mut rng)).collect()
                }
            };
            let cfg = SimplexConfig { step: if k < starts.len() { 0.05 } else { cfg.step }, ..cfg };
            minimize(|x| sign * objective(x), &x0, &cfg)
        })
        .collect();
    let mut best: Option<&SimplexResult> = None;
    let mut history = Vec::with_capacity(total);
    for r in &runs {
        if best.is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
        history.push(sign * best.map_or(f64::INFINITY, |b| b.value));
    }
    let best = best.expect("at least one restart");
    OptEstimate {
        value: sign * best.value,
        direction,
        restarts_used: total,
        best_params: best.x.clone(),
        converged: best.converged,
        history,
        seed: opts.seed,
    }
}
