//! Grid experiments. A "limit" is the last value of a series whose final
//! three points agree within `PLATEAU_REL`; the flag says whether that held.

use rayon::prelude::*;
use serde::Serialize;

use crate::sequence::StateSequence;
use crate::{DiniError, DiniResult, GAP_TOL};

pub const PLATEAU_REL: f64 = 0.01;
/// Jumps below this are not resolved by the grids used here.
pub const JUMP_FLOOR: f64 = 1e-6;
const PLATEAU_ABS: f64 = 1e-9;

/// `(last value, plateau reached)`.
pub fn plateau(values: &[f64]) -> (f64, bool) {
    let Some(&last) = values.last() else {
        return (f64::NAN, false);
    };
    if values.len() < 3 {
        return (last, false);
    }
    let w = &values[values.len() - 3..];
    let close = |a: f64, b: f64| (a - b).abs() <= PLATEAU_REL * a.abs().max(b.abs()) + PLATEAU_ABS;
    (last, close(w[0], w[1]) && close(w[1], w[2]))
}

fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// `r S(sigma)` for the part of `spec` (descending runs) past its first `m`
/// entries, together with `r`.
fn tail_value(spec: &[(f64, usize)], m: usize) -> (f64, f64) {
    let mut skip = m;
    let (mut r, mut h) = (0.0, 0.0);
    for &(v, c) in spec {
        let take = c.min(skip);
        skip -= take;
        let rest = (c - take) as f64;
        r += rest * v;
        h += rest * eta(v);
    }
    if r <= 0.0 {
        (0.0, 0.0)
    } else {
        (h + r * r.ln(), r)
    }
}

/// `m` with `lambda_{m+1} < lambda_m` (gap above `GAP_TOL`) or `lambda_m = 0`.
fn admissible(limit: &[(f64, usize)], m: usize) -> bool {
    let at = |k: usize| {
        let mut left = k;
        for &(v, c) in limit {
            if left <= c {
                return v;
            }
            left -= c;
        }
        0.0
    };
    let lm = at(m);
    lm < GAP_TOL || at(m + 1) < lm - GAP_TOL
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpCell {
    pub m: usize,
    pub n: u32,
    pub dim: usize,
    /// Weight of the residual `rho_n - Psi_m(rho_n)`.
    pub r: f64,
    /// `r S(residual / r)`.
    pub value: f64,
    /// `S(rho_n) - S(rho_0)`.
    pub entropy_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MEstimate {
    pub m: usize,
    pub limsup: f64,
    pub plateau: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpReport {
    /// `lim_m limsup_n` of the cell values.
    pub estimated_jump: f64,
    pub plateau: bool,
    pub per_m: Vec<MEstimate>,
    pub m_used: Vec<usize>,
    /// `lim_n lim_m`, the other order of the same grid.
    pub other_order: f64,
    pub orders_disagree: bool,
    pub cells: Vec<JumpCell>,
    pub limit_entropy: f64,
    pub n_grid: Vec<u32>,
}

/// Tail supremum `max_{j >= k} v_j` for each `k`.
fn tail_sup(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for k in (0..out.len().saturating_sub(1)).rev() {
        out[k] = out[k].max(out[k + 1]);
    }
    out
}

pub fn entropy_jump_experiment(seq: &StateSequence, m_grid: &[usize]) -> DiniResult<JumpReport> {
    seq.check_convergent()?;
    let limit_spec = seq.limit.spectrum();
    let mut m_used: Vec<usize> = m_grid
        .iter()
        .copied()
        .filter(|&m| m >= 1 && admissible(&limit_spec, m))
        .collect();
    m_used.sort_unstable();
    m_used.dedup();
    if m_used.is_empty() {
        return Err(DiniError::Spec("no admissible m in the grid".into()));
    }
    let limit_entropy = seq.limit.entropy();
    let rows: Vec<(u32, usize, f64, Vec<(f64, usize)>)> = seq
        .terms
        .par_iter()
        .map(|(n, s)| {
            let spec = s.spectrum();
            let dim = spec.iter().map(|r| r.1).sum();
            (*n, dim, s.entropy(), spec)
        })
        .collect();
    let cells: Vec<JumpCell> = m_used
        .par_iter()
        .flat_map_iter(|&m| {
            rows.iter().map(move |(n, dim, s, spec)| {
                let (value, r) = tail_value(spec, m);
                JumpCell {
                    m,
                    n: *n,
                    dim: *dim,
                    r,
                    value,
                    entropy_gap: s - limit_entropy,
                }
            })
        })
        .collect();
    let nn = rows.len();
    let value = |mi: usize, ni: usize| cells[mi * nn + ni].value;

    let per_m: Vec<MEstimate> = (0..m_used.len())
        .map(|mi| {
            let series: Vec<f64> = (0..nn).map(|ni| value(mi, ni)).collect();
            let (limsup, plateau) = plateau(&tail_sup(&series));
            MEstimate {
                m: m_used[mi],
                limsup,
                plateau,
            }
        })
        .collect();
    let (estimated_jump, outer) = plateau(&per_m.iter().map(|e| e.limsup).collect::<Vec<_>>());
    let inner_ok = per_m.last().is_some_and(|e| e.plateau);
    let by_n: Vec<f64> = (0..nn)
        .map(|ni| {
            plateau(
                &(0..m_used.len())
                    .map(|mi| value(mi, ni))
                    .collect::<Vec<_>>(),
            )
            .0
        })
        .collect();
    let other_order = plateau(&by_n).0;
    let orders_disagree = (estimated_jump - other_order).abs()
        > 0.05 * estimated_jump.abs().max(other_order.abs()) + PLATEAU_ABS;
    Ok(JumpReport {
        estimated_jump,
        plateau: outer && inner_ok,
        per_m,
        m_used,
        other_order,
        orders_disagree,
        cells,
        limit_entropy,
        n_grid: seq.n_grid(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiniQuantity {
    Entropy,
    /// `I(A:B)` of dense bipartite terms.
    Qmi,
}

#[derive(Debug, Clone, Serialize)]
pub struct DctReport {
    pub jump_rho: f64,
    pub jump_tau: f64,
    pub jump_tau_over_c: f64,
    pub tolerance: f64,
    /// `jump_rho <= jump_tau / c + tolerance`, with `tolerance` 1% of the
    /// right side plus `JUMP_FLOOR`.
    pub holds: bool,
    pub deepest_n: u32,
}

fn quantity_jump(seq: &StateSequence, q: DiniQuantity, m_grid: &[usize]) -> DiniResult<f64> {
    match q {
        DiniQuantity::Entropy => Ok(entropy_jump_experiment(seq, m_grid)?.estimated_jump),
        DiniQuantity::Qmi => {
            seq.check_convergent()?;
            let f0 = seq.limit.qmi()?;
            let d: Vec<f64> = seq
                .terms
                .iter()
                .map(|(_, s)| Ok((s.qmi()? - f0).abs()))
                .collect::<DiniResult<_>>()?;
            Ok(plateau(&tail_sup(&d)).0)
        }
    }
}

/// Checks `c rho_n <= tau_n` along the grid, then compares the jumps.
pub fn dominated_convergence_check(
    rho: &StateSequence,
    tau: &StateSequence,
    c: f64,
    quantity: DiniQuantity,
    m_grid: &[usize],
) -> DiniResult<DctReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(DiniError::Spec(format!("c must be positive, got {c}")));
    }
    if rho.n_grid() != tau.n_grid() {
        return Err(DiniError::Spec(
            "rho and tau sequences need the same n grid".into(),
        ));
    }
    let limit_gap = rho.limit.domination_gap(&tau.limit, c)?;
    if limit_gap < -1e-10 {
        return Err(DiniError::NotDominated {
            n: 0,
            min_eig: limit_gap,
        });
    }
    for ((n, r), (_, t)) in rho.terms.iter().zip(&tau.terms) {
        let g = r.domination_gap(t, c)?;
        if g < -1e-10 {
            return Err(DiniError::NotDominated { n: *n, min_eig: g });
        }
    }
    let jump_rho = quantity_jump(rho, quantity, m_grid)?;
    let jump_tau = quantity_jump(tau, quantity, m_grid)?;
    let jump_tau_over_c = jump_tau / c;
    let tolerance = PLATEAU_REL * jump_tau_over_c.abs() + JUMP_FLOOR;
    Ok(DctReport {
        jump_rho,
        jump_tau,
        jump_tau_over_c,
        tolerance,
        holds: jump_rho <= jump_tau_over_c + tolerance,
        deepest_n: rho.terms.last().map_or(0, |t| t.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MixtureReport {
    /// `(n, |S(p_n rho_n + (1 - p_n) sigma_n) - S(p_0 rho_0 + (1 - p_0) sigma_0)|)`.
    pub gaps: Vec<(u32, f64)>,
    pub final_gap: f64,
    pub holds: bool,
}

pub const MIXTURE_TOL: f64 = 1e-4;

pub fn mixture_convergence_check(
    rho: &StateSequence,
    sigma: &StateSequence,
    p_seq: &[f64],
    p0: f64,
) -> DiniResult<MixtureReport> {
    if rho.n_grid() != sigma.n_grid() || p_seq.len() != rho.terms.len() {
        return Err(DiniError::Spec(
            "rho, sigma and p need the same grid".into(),
        ));
    }
    if p_seq.iter().chain([&p0]).any(|p| !(0.0..=1.0).contains(p)) {
        return Err(DiniError::Spec("mixing weights must lie in [0, 1]".into()));
    }
    let target = rho.limit.mix(&sigma.limit, p0)?.entropy();
    let gaps: Vec<(u32, f64)> = rho
        .terms
        .iter()
        .zip(&sigma.terms)
        .zip(p_seq)
        .map(|(((n, r), (_, s)), &p)| Ok((*n, (r.mix(s, p)?.entropy() - target).abs())))
        .collect::<DiniResult<_>>()?;
    let final_gap = gaps.last().map_or(f64::NAN, |g| g.1);
    Ok(MixtureReport {
        gaps,
        final_gap,
        holds: final_gap <= MIXTURE_TOL,
    })
}
