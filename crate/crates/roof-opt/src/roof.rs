//! Convex-roof style searches over pure-state decompositions.
//!
//! The `n`-term decompositions of `omega = W W^dag` (`W = [sqrt(l_j) e_j]`)
//! are exactly the columns of `W V^T` for isometries `V` (n x rank).

use entropic::{marginal_entropy, matrix_entropy, relative_entropy_matrices, reorder, RelEntropy};
use qstate_core::{eigh_matrix, partial_trace, Density, Mat, C64};
use serde::{Deserialize, Serialize};

use crate::chart::{isometry, param_count, params_of};
use crate::{multistart, Direction, OptEstimate, RoofError, RoofOptions, RoofResult};

/// Eigenvalues below this fraction of the largest are dropped from the support.
pub(crate) const SUPPORT_TOL: f64 = 1e-13;
/// A state counts as pure when its top eigenvalue is at least `1 - PURE_TOL`.
pub const PURE_TOL: f64 = 1e-10;

/// Matrix of `omega` with `first` moved to the front, plus both dims.
pub(crate) fn bipartite(omega: &Density, first: &str) -> RoofResult<(Mat, usize, usize)> {
    let labels = omega.layout().labels();
    if labels.len() != 2 {
        return Err(RoofError::Layout(format!("expected two parts, got {}", omega.layout().describe())));
    }
    let other = labels
        .iter()
        .find(|&&l| l != first)
        .copied()
        .ok_or_else(|| RoofError::Layout(format!("no part besides {first}")))?;
    if !labels.contains(&first) {
        return Err(RoofError::Layout(format!("unknown part {first} in {}", omega.layout().describe())));
    }
    let r = reorder(omega, &[first, other])?;
    let dims = r.layout().dims();
    Ok((r.matrix().clone(), dims[0], dims[1]))
}

/// `p S(g / p)` for a PSD `g` of trace `p`.
pub(crate) fn weighted_entropy(g: &Mat) -> f64 {
    let p: f64 = (0..g.nrows()).map(|i| g[(i, i)].re).sum();
    if p <= 0.0 {
        return 0.0;
    }
    matrix_entropy(g) + p * p.ln()
}

/// Columns `sqrt(l_j) e_j` over the support.
pub(crate) fn support(m: &Mat) -> Mat {
    let eig = eigh_matrix(m);
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > SUPPORT_TOL * top).collect();
    Mat::from_fn(m.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])] * eig.eigenvalues[keep[c]].sqrt())
}

pub(crate) fn top_eigenvalue(m: &Mat) -> f64 {
    eigh_matrix(m).eigenvalues.first().copied().unwrap_or(0.0)
}

/// `M M^dag` for the amplitude matrix `M[a, b] = psi[a db + b]`.
pub(crate) fn reduced_first(psi: &[C64], da: usize, db: usize) -> Mat {
    Mat::from_fn(da, da, |a, a2| (0..db).map(|b| psi[a * db + b] * psi[a2 * db + b].conj()).sum())
}

/// Reduced state on whichever side is smaller; both carry the same entropy.
fn reduced_small(psi: &[C64], da: usize, db: usize) -> Mat {
    if da <= db {
        reduced_first(psi, da, db)
    } else {
        Mat::from_fn(db, db, |b, b2| (0..da).map(|a| psi[a * db + b] * psi[a * db + b2].conj()).sum())
    }
}

/// Unnormalized members `W V^T`, one column each.
pub(crate) fn members(w: &Mat, params: &[f64], n: usize) -> Mat {
    let v = isometry(params, n, w.ncols());
    w * v.transpose()
}

fn identity_seed(n: usize, r: usize) -> Vec<f64> {
    params_of(&Mat::from_fn(n, r, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
}

struct Roof {
    m: Mat,
    da: usize,
    db: usize,
    w: Mat,
}

fn prepare(omega: &Density, part_a: &str, n_terms: usize) -> RoofResult<Option<Roof>> {
    let (m, da, db) = bipartite(omega, part_a)?;
    if top_eigenvalue(&m) >= 1.0 - PURE_TOL {
        return Ok(None);
    }
    let w = support(&m);
    if n_terms < w.ncols() {
        return Err(RoofError::TooFewTerms { n_terms, rank: w.ncols() });
    }
    Ok(Some(Roof { m, da, db, w }))
}

/// Upper estimate of the entanglement of formation: the smallest average
/// `S([omega_k]_A)` found over `n_terms`-term pure decompositions. Pure
/// inputs return `S(omega_A)` without search.
pub fn eof_roof(omega: &Density, part_a: &str, n_terms: usize, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    let Some(p) = prepare(omega, part_a, n_terms)? else {
        return Ok(OptEstimate::exact(marginal_entropy(omega, &[part_a])?, Direction::UpperOfInf));
    };
    let r = p.w.ncols();
    let objective = |x: &[f64]| {
        let psi = members(&p.w, x, n_terms);
        (0..n_terms)
            .map(|k| {
                let col: Vec<C64> = psi.column(k).iter().copied().collect();
                weighted_entropy(&reduced_small(&col, p.da, p.db))
            })
            .sum::<f64>()
    };
    Ok(multistart(param_count(n_terms, r), vec![identity_seed(n_terms, r)], opts, Direction::UpperOfInf, objective))
}

/// Lower estimate of the Holevo quantity of the partial trace,
/// `sup sum_k p_k D([omega_k]_A || omega_A)` over `n_terms`-term pure
/// decompositions. Computed through relative entropies, independently of
/// [`eof_roof`], so `S(omega_A) - E_F` serves as a cross-check.
pub fn chi_partial_trace(omega: &Density, part_a: &str, n_terms: usize, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    let Some(p) = prepare(omega, part_a, n_terms)? else {
        return Ok(OptEstimate::exact(0.0, Direction::LowerOfSup));
    };
    let omega_a = reduced_of(&p.m, p.da, p.db);
    let r = p.w.ncols();
    let objective = |x: &[f64]| {
        let psi = members(&p.w, x, n_terms);
        let mut total = 0.0;
        for k in 0..n_terms {
            let col: Vec<C64> = psi.column(k).iter().copied().collect();
            let g = reduced_first(&col, p.da, p.db);
            let pk: f64 = (0..p.da).map(|i| g[(i, i)].re).sum();
            if pk <= 1e-300 {
                continue;
            }
            match relative_entropy_matrices(&g.unscale(pk), &omega_a) {
                RelEntropy::Finite(d) => total += pk * d,
                RelEntropy::Infinite => return f64::NAN,
            }
        }
        total
    };
    Ok(multistart(param_count(n_terms, r), vec![identity_seed(n_terms, r)], opts, Direction::LowerOfSup, objective))
}

fn reduced_of(m: &Mat, da: usize, db: usize) -> Mat {
    Mat::from_fn(da, da, |a, a2| (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoashiWinter {
    pub c_b: OptEstimate,
    pub chi_a: OptEstimate,
    pub gap: f64,
}

/// Both sides of `C_B(omega_AB) = chi_A(omega_AC)` for a pure state on
/// parts `A`, `B`, `C`. A rank-1 POVM with `d_B^2` outcomes on B and a
/// `d_B^2`-term decomposition of `omega_AC` are searched independently.
pub fn koashi_winter_check(omega: &Density, opts: &RoofOptions) -> RoofResult<KoashiWinter> {
    let layout = omega.layout();
    for l in ["A", "B", "C"] {
        if layout.index_of(l).is_none() || layout.len() != 3 {
            return Err(RoofError::Layout(format!("expected parts A, B, C, got {}", layout.describe())));
        }
    }
    let lambda_max = top_eigenvalue(omega.matrix());
    if lambda_max < 1.0 - PURE_TOL {
        return Err(RoofError::NotPure { lambda_max });
    }
    let db = layout.dim_of("B")?;
    let k = db * db;
    let c_b = crate::classical_correlation(&partial_trace(omega, &["A", "B"])?, "B", k, &opts.child(1))?;
    let chi_a = chi_partial_trace(&partial_trace(omega, &["A", "C"])?, "A", k, &opts.child(2))?;
    let gap = (c_b.value - chi_a.value).abs();
    Ok(KoashiWinter { c_b, chi_a, gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qstate_core::{maximally_entangled, SystemLayout, Vector};

    fn quick() -> RoofOptions {
        RoofOptions::with_restarts(4, 1)
    }

    #[test]
    fn pure_states_short_circuit() {
        let l = 0.3f64;
        let mut v = Vector::zeros(4);
        v[0] = C64::new(l.sqrt(), 0.0);
        v[3] = C64::new((1.0 - l).sqrt(), 0.0);
        let psi = Density::from_pure(&v, SystemLayout::new([("A", 2), ("B", 2)]).unwrap()).unwrap();
        let e = eof_roof(&psi, "A", 4, &quick()).unwrap();
        let h = -l * l.ln() - (1.0 - l) * (1.0 - l).ln();
        assert!((e.value - h).abs() < 1e-12);
        assert_eq!(e.restarts_used, 0);
        let bell = maximally_entangled::<f64>(2).unwrap();
        assert!((eof_roof(&bell, "B", 1, &quick()).unwrap().value - 2f64.ln()).abs() < 1e-12);
        assert_eq!(chi_partial_trace(&bell, "A", 1, &quick()).unwrap().value, 0.0);
    }

    #[test]
    fn classically_correlated_states_have_zero_roof() {
        let layout = SystemLayout::new([("A", 3), ("B", 3)]).unwrap();
        let mut p = vec![0.0; 9];
        for (i, w) in [0.5, 0.3, 0.2].iter().enumerate() {
            p[i * 3 + i] = *w;
        }
        let rho = Density::from_diagonal(&p, layout).unwrap();
        let e = eof_roof(&rho, "A", 3, &quick()).unwrap();
        assert!(e.value.abs() <= 1e-8, "{}", e.value);
        let chi = chi_partial_trace(&rho, "A", 3, &quick()).unwrap();
        let h = -[0.5f64, 0.3, 0.2].iter().map(|x| x * x.ln()).sum::<f64>();
        assert!((chi.value - h).abs() <= 1e-6, "{} vs {h}", chi.value);
    }

    #[test]
    fn too_few_terms() {
        let rho = qstate_core::chaotic::<f64>(&SystemLayout::new([("A", 2), ("B", 2)]).unwrap());
        assert!(matches!(eof_roof(&rho, "A", 3, &quick()), Err(RoofError::TooFewTerms { rank: 4, .. })));
        assert!(matches!(eof_roof(&rho, "X", 4, &quick()), Err(RoofError::Layout(_))));
    }

    #[test]
    fn decomposition_reproduces_the_state() {
        let rho = qstate_core::random_mixed::<f64>(&SystemLayout::new([("A", 2), ("B", 2)]).unwrap(), 3, 5).unwrap();
        let w = support(rho.matrix());
        assert_eq!(w.ncols(), 3);
        let ww = &w * w.adjoint();
        assert!((ww - rho.matrix()).iter().all(|z| z.norm() < 1e-12), "support");
        let x: Vec<f64> = (0..param_count(5, 3)).map(|k| ((k * k) as f64 * 0.37).sin()).collect();
        let v = isometry(&x, 5, 3);
        let e = (v.adjoint() * &v - Mat::identity(3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(e < 1e-12, "iso {e}");
        let psi = members(&w, &x, 5);
        let back = &psi * psi.adjoint();
        let err = (back - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
