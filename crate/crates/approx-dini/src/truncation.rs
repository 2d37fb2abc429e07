//! `Psi_m(rho) = P_m rho` with `P_m` the spectral projector onto the `m`
//! largest eigenvalues. Inside a degenerate eigenspace the basis is the one
//! obtained from the computational basis by successive projection (the
//! rule `qstate_core::eigh` already applies), which makes `P_m` unique.

use qstate_core::{eigh_matrix, eigvalsh, Density, Mat, C64};
use serde::Serialize;

use crate::diag::SeqState;
use crate::{DiniError, DiniResult};

#[derive(Debug, Clone)]
pub struct TruncationRecord {
    pub m: usize,
    /// `Tr Psi_m(rho)`.
    pub mu: f64,
    /// `Psi_m(rho) / mu`.
    pub truncated_state: Density,
    /// `1 - mu`.
    pub residual_weight: f64,
    /// `(rho - Psi_m(rho)) / r`, absent when `r = 0`.
    pub residual_state: Option<Density>,
    /// `P_m`.
    pub projector: Mat,
}

fn psi_parts(rho: &Density, m: usize) -> (Mat, Mat) {
    let eig = eigh_matrix(rho.matrix());
    let n = rho.dim();
    let mut psi = Mat::zeros(n, n);
    let mut proj = Mat::zeros(n, n);
    for k in 0..m.min(n) {
        let v = eig.eigenvectors.column(k);
        let outer = &v * v.adjoint();
        psi += &outer * C64::new(eig.eigenvalues[k].max(0.0), 0.0);
        proj += outer;
    }
    (psi, proj)
}

/// `Psi_m(rho)` unnormalized.
pub fn psi_m(rho: &Density, m: usize) -> Mat {
    psi_parts(rho, m).0
}

pub fn spectral_truncation(rho: &Density, m: usize) -> DiniResult<TruncationRecord> {
    if m == 0 {
        return Err(DiniError::Spec("truncation needs m >= 1".into()));
    }
    let (psi, projector) = psi_parts(rho, m);
    let mu: f64 = (0..rho.dim()).map(|i| psi[(i, i)].re).sum();
    let residual_weight = (1.0 - mu).max(0.0);
    let truncated_state = Density::from_matrix_unchecked(psi.unscale(mu), rho.layout().clone());
    let residual_state = if residual_weight > 1e-14 {
        let rest = rho.matrix() - &psi;
        Some(Density::from_matrix_unchecked(
            rest.unscale(residual_weight),
            rho.layout().clone(),
        ))
    } else {
        None
    };
    Ok(TruncationRecord {
        m,
        mu,
        truncated_state,
        residual_weight,
        residual_state,
        projector,
    })
}

/// Smallest eigenvalue of `Psi_{m+1} - Psi_m` and of `rho - Psi_m` over all
/// `m < dim`; nonnegative up to rounding.
pub fn monotone_defect(rho: &Density) -> f64 {
    let n = rho.dim();
    let mut worst = f64::INFINITY;
    let mut prev = Mat::zeros(n, n);
    for m in 1..=n {
        let cur = psi_m(rho, m);
        let step = eigvalsh(&(&cur - &prev)).last().copied().unwrap_or(0.0);
        let below = eigvalsh(&(rho.matrix() - &cur))
            .last()
            .copied()
            .unwrap_or(0.0);
        worst = worst.min(step).min(below);
        prev = cur;
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub m: usize,
    /// `inf` over the family of `Tr Psi_m(rho)`.
    pub inf_mu: f64,
    /// Index of the member attaining it.
    pub argmin: usize,
}

/// `inf_rho Tr Psi_m(rho)` over `family` for each `m` of the grid.
pub fn uniform_trace_convergence(
    family: &[SeqState],
    m_grid: &[usize],
) -> DiniResult<Vec<TraceRow>> {
    if family.is_empty() {
        return Err(DiniError::Spec("empty family".into()));
    }
    let spectra: Vec<Vec<(f64, usize)>> = family.iter().map(|s| s.spectrum()).collect();
    let mut grid = m_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    Ok(grid
        .into_iter()
        .map(|m| {
            let (argmin, inf_mu) = spectra.iter().map(|s| top_mass(s, m)).enumerate().fold(
                (0, f64::INFINITY),
                |best, (i, v)| if v < best.1 { (i, v) } else { best },
            );
            TraceRow { m, inf_mu, argmin }
        })
        .collect())
}

/// Sum of the `m` largest eigenvalues of a nonincreasing run spectrum.
pub(crate) fn top_mass(spec: &[(f64, usize)], m: usize) -> f64 {
    let mut left = m;
    let mut acc = 0.0;
    for &(v, c) in spec {
        if left == 0 {
            break;
        }
        let take = c.min(left);
        acc += v * take as f64;
        left -= take;
    }
    acc
}

/// `(sum_i |l_i(a) - l_i(b)|, ||a - b||_1)`: the first never exceeds the
/// second.
pub fn mirsky_check(a: &SeqState, b: &SeqState) -> DiniResult<(f64, f64)> {
    let (sa, sb) = (expand(&a.spectrum()), expand(&b.spectrum()));
    let n = sa.len().max(sb.len());
    let lhs = (0..n)
        .map(|i| (sa.get(i).copied().unwrap_or(0.0) - sb.get(i).copied().unwrap_or(0.0)).abs())
        .sum();
    Ok((lhs, 2.0 * a.distance(b)?))
}

fn expand(spec: &[(f64, usize)]) -> Vec<f64> {
    spec.iter()
        .flat_map(|&(v, c)| std::iter::repeat_n(v, c))
        .collect()
}
