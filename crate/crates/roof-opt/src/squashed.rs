//! Upper estimates of the c-squashed and squashed entanglement.

use entropic::{matrix_entropy, mutual_information};
use qstate_core::{eigh_matrix, partial_trace_matrix, Density, Ensemble, Mat, C64};

use crate::chart::{isometry, param_count, params_of};
use crate::roof::{bipartite, support, top_eigenvalue, weighted_entropy, PURE_TOL};
use crate::{multistart, Direction, OptEstimate, RoofError, RoofOptions, RoofResult};

fn half_mi(omega: &Density) -> RoofResult<f64> {
    let l = omega.layout().labels();
    Ok(0.5 * mutual_information(omega, &[l[0]], &[l[1]])?)
}

/// `p I(A:B)` of an unnormalized bipartite operator.
fn weighted_mi(m: &Mat, da: usize, db: usize) -> f64 {
    let a = partial_trace_matrix(m, &[da, db], &[true, false]);
    let b = partial_trace_matrix(m, &[da, db], &[false, true]);
    let p: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    if p <= 0.0 {
        return 0.0;
    }
    weighted_entropy(&a) + weighted_entropy(&b) - weighted_entropy(m)
}

struct Split {
    da: usize,
    db: usize,
    w: Mat,
}

fn split(omega: &Density) -> RoofResult<Option<Split>> {
    let first = omega.layout().labels().first().map(|s| s.to_string()).unwrap_or_default();
    let (m, da, db) = bipartite(omega, &first)?;
    if top_eigenvalue(&m) >= 1.0 - PURE_TOL {
        return Ok(None);
    }
    Ok(Some(Split { da, db, w: support(&m) }))
}

/// Eigenvector `j` alone in group `j mod m`.
fn spread_seed(m: usize, r: usize) -> Vec<f64> {
    let mut v = Mat::zeros(m * r, r);
    for j in 0..r {
        v[((j % m) * r + j / m, j)] = C64::new(1.0, 0.0);
    }
    params_of(&v)
}

fn c_squashed_search(omega: &Density, m_terms: usize, mut seeds: Vec<Vec<f64>>, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    if m_terms == 0 {
        return Err(RoofError::Domain("c-squashed estimate needs m_terms >= 1".into()));
    }
    let Some(s) = split(omega)? else {
        return Ok(OptEstimate::exact(half_mi(omega)?, Direction::UpperOfInf));
    };
    let r = s.w.ncols();
    let n = m_terms * r;
    seeds.push(spread_seed(m_terms, r));
    let objective = |x: &[f64]| {
        let psi = &s.w * isometry(x, n, r).transpose();
        let mut total = 0.0;
        for g in 0..m_terms {
            let cols = psi.columns(g * r, r);
            total += weighted_mi(&(cols * cols.adjoint()), s.da, s.db);
        }
        0.5 * total
    };
    Ok(multistart(param_count(n, r), seeds, opts, Direction::UpperOfInf, objective))
}

/// Upper estimate of `E^c_sq`: half the smallest average `I(A:B)` found over
/// decompositions of `omega` into `m_terms` mixed states. Pure inputs have
/// only the trivial decomposition and return `I(A:B)/2`.
pub fn c_squashed_estimate(omega: &Density, m_terms: usize, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    c_squashed_search(omega, m_terms, Vec::new(), opts)
}

/// As [`c_squashed_estimate`], with the given decomposition as an extra
/// starting point (so a separable state passed as a mixture of products
/// starts at zero). Its members must sum to `omega`.
pub fn c_squashed_from(omega: &Density, start: &Ensemble<f64>, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    let total = start.average();
    if total.matrix().iter().zip(omega.matrix().iter()).any(|(a, b)| (a - b).norm() > 1e-9) {
        return Err(RoofError::Domain("decomposition does not average to the state".into()));
    }
    let Some(s) = split(omega)? else {
        return Ok(OptEstimate::exact(half_mi(omega)?, Direction::UpperOfInf));
    };
    let first = omega.layout().labels()[0].to_string();
    let r = s.w.ncols();
    let m_terms = start.len();
    // V_kj = <e_j|psi_k> / sqrt(l_j), i.e. V^T = W^+ Psi.
    let w_pinv = {
        let mut p = s.w.adjoint();
        for j in 0..r {
            let l = s.w.column(j).norm_squared();
            for c in 0..p.ncols() {
                p[(j, c)] /= l;
            }
        }
        p
    };
    let mut psi = Mat::zeros(s.da * s.db, m_terms * r);
    for (g, (p, member)) in start.items().iter().enumerate() {
        let (mm, _, _) = bipartite(member, &first)?;
        let eig = eigh_matrix(&mm);
        for (k, &l) in eig.eigenvalues.iter().enumerate().take(r) {
            if l > 0.0 {
                psi.set_column(g * r + k, &(eig.eigenvectors.column(k) * C64::new((p * l).sqrt(), 0.0)));
            }
        }
    }
    let v = (w_pinv * psi).transpose();
    c_squashed_search(omega, m_terms, vec![params_of(&v)], opts)
}

/// Extensions `omega_ABE` from a channel `R -> E` applied to a
/// purification; the channel is a Stinespring isometry stacked from
/// `r * e` Kraus blocks of size `e x r`.
struct Extension {
    da: usize,
    db: usize,
    w: Mat,
    e: usize,
}

impl Extension {
    fn kraus_count(&self) -> usize {
        self.w.ncols() * self.e
    }

    fn half_cmi(&self, x: &[f64]) -> f64 {
        let (r, e) = (self.w.ncols(), self.e);
        let j = self.kraus_count();
        let stin = isometry(x, j * e, r);
        let d = self.da * self.db;
        let mut ext = Mat::zeros(d * e, d * e);
        for kk in 0..j {
            let k = stin.rows(kk * e, e);
            let v = &self.w * k.transpose();
            let flat = Mat::from_fn(d * e, 1, |i, _| v[(i / e, i % e)]);
            ext += &flat * flat.adjoint();
        }
        let dims = [self.da, self.db, e];
        let s = |keep: [bool; 3]| matrix_entropy(&partial_trace_matrix(&ext, &dims, &keep));
        let cmi = s([true, false, true]) + s([false, true, true]) - matrix_entropy(&ext) - s([false, false, true]);
        0.5 * cmi
    }
}

/// Upper estimate of `E_sq` over extensions with `dim E = ext_dim`.
/// Extension dimensions `2..=ext_dim` are searched in turn, each starting
/// from the previous optimum and from the c-squashed optimum with the same
/// number of terms, so the estimate is nonincreasing in `ext_dim` and never
/// above [`c_squashed_estimate`] for the same options.
pub fn squashed_upper(omega: &Density, ext_dim: usize, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    if ext_dim == 0 {
        return Err(RoofError::Domain("ext_dim must be >= 1".into()));
    }
    let Some(s) = split(omega)? else {
        return Ok(OptEstimate::exact(half_mi(omega)?, Direction::UpperOfInf));
    };
    let trivial = OptEstimate::exact(half_mi(omega)?, Direction::UpperOfInf);
    if ext_dim == 1 {
        return Ok(trivial);
    }
    let r = s.w.ncols();
    let mut prev: Option<(Mat, usize)> = None;
    let mut best = trivial;
    for e in 2..=ext_dim {
        let ext = Extension { da: s.da, db: s.db, w: s.w.clone(), e };
        let j = ext.kraus_count();
        let mut seeds = Vec::new();
        let cs = c_squashed_estimate(omega, e, &opts.child(e as u64))?;
        if !cs.best_params.is_empty() {
            let v = isometry(&cs.best_params, e * r, r);
            let mut stin = Mat::zeros(j * e, r);
            for kk in 0..e * r {
                stin.set_row(kk * e + kk / r, &v.row(kk));
            }
            seeds.push(params_of(&stin));
        }
        if let Some((p, pe)) = &prev {
            let mut stin = Mat::zeros(j * e, r);
            for kk in 0..r * pe {
                for row in 0..*pe {
                    stin.set_row(kk * e + row, &p.row(kk * pe + row));
                }
            }
            seeds.push(params_of(&stin));
        }
        let est = multistart(param_count(j * e, r), seeds, opts, Direction::UpperOfInf, |x| ext.half_cmi(x));
        let est = if est.value <= best.value { est } else { OptEstimate { history: vec![best.value], ..best.clone() } };
        prev = if est.best_params.is_empty() { None } else { Some((isometry(&est.best_params, j * e, r), e)) };
        best = est;
    }
    Ok(best)
}
