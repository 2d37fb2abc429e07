//! One-way classical correlation and discord by search over rank-1 POVMs.
//!
//! A rank-1 POVM with `K` outcomes on a `d`-dimensional part is a `K x d`
//! isometry `U`: `M_i = u_i^dag u_i` with `u_i` its rows. This is a
//! projective measurement on a `K`-dimensional enlargement of the part.

use entropic::{matrix_entropy, mutual_information};
use qstate_core::{eigh_matrix, Density, Mat, C64};

use crate::chart::{isometry, param_count, params_of};
use crate::roof::{bipartite, weighted_entropy};
use crate::{multistart, Direction, OptEstimate, RoofError, RoofOptions, RoofResult};

/// `omega` as `d_B x d_B` blocks of `d_A x d_A` matrices.
struct Blocks {
    da: usize,
    db: usize,
    blocks: Vec<Mat>,
}

impl Blocks {
    fn new(m: &Mat, da: usize, db: usize) -> Self {
        let mut blocks = Vec::with_capacity(db * db);
        for b in 0..db {
            for b2 in 0..db {
                blocks.push(Mat::from_fn(da, da, |a, a2| m[(a * db + b, a2 * db + b2)]));
            }
        }
        Self { da, db, blocks }
    }

    /// `(I (x) <phi|) omega (I (x) |phi>)` with `<phi|b> = u[b]`.
    fn outcome(&self, u: &[C64]) -> Mat {
        let mut out = Mat::zeros(self.da, self.da);
        for b in 0..self.db {
            for b2 in 0..self.db {
                let w = u[b] * u[b2].conj();
                if w.norm_sqr() > 0.0 {
                    out += &self.blocks[b * self.db + b2] * w;
                }
            }
        }
        out
    }

    fn marginal_a(&self) -> Mat {
        (0..self.db).fold(Mat::zeros(self.da, self.da), |acc, b| acc + &self.blocks[b * self.db + b])
    }
}

/// Rows: the given basis (as `<e_j|`), then zeros up to `k`.
fn basis_seed(basis: &Mat, k: usize) -> Vec<f64> {
    let d = basis.nrows();
    params_of(&Mat::from_fn(k, d, |i, b| if i < basis.ncols() { basis[(b, i)].conj() } else { C64::new(0.0, 0.0) }))
}

/// Lower estimate of `C_B`: the largest Holevo quantity of the A-ensemble
/// induced by a rank-1 POVM with `n_outcomes` outcomes on `measured_part`.
/// The search always starts from the eigenbasis of the measured marginal
/// and from the computational basis.
pub fn classical_correlation(
    omega: &Density,
    measured_part: &str,
    n_outcomes: usize,
    opts: &RoofOptions,
) -> RoofResult<OptEstimate> {
    let other = omega
        .layout()
        .labels()
        .into_iter()
        .find(|&l| l != measured_part)
        .ok_or_else(|| RoofError::Layout(format!("no part besides {measured_part}")))?
        .to_string();
    let (m, da, db) = bipartite(omega, &other)?;
    if n_outcomes < db {
        return Err(RoofError::Domain(format!("a rank-1 POVM on dimension {db} needs >= {db} outcomes, got {n_outcomes}")));
    }
    let blocks = Blocks::new(&m, da, db);
    let s_a = matrix_entropy(&blocks.marginal_a());
    let omega_b = Mat::from_fn(db, db, |b, b2| (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum());
    let seeds = vec![basis_seed(&eigh_matrix(&omega_b).eigenvectors, n_outcomes), basis_seed(&Mat::identity(db, db), n_outcomes)];
    let objective = |x: &[f64]| {
        let u = isometry(x, n_outcomes, db);
        let avg: f64 = (0..n_outcomes)
            .map(|i| {
                let row: Vec<C64> = u.row(i).iter().copied().collect();
                weighted_entropy(&blocks.outcome(&row))
            })
            .sum();
        s_a - avg
    };
    Ok(multistart(param_count(n_outcomes, db), seeds, opts, Direction::LowerOfSup, objective))
}

/// Upper estimate of the discord `I(A:B) - C_B`, never negative.
pub fn discord(omega: &Density, measured_part: &str, n_outcomes: usize, opts: &RoofOptions) -> RoofResult<OptEstimate> {
    let labels = omega.layout().labels();
    let c = classical_correlation(omega, measured_part, n_outcomes, opts)?;
    let mi = mutual_information(omega, &[labels[0]], &[labels[1]])?;
    let flip = |v: f64| (mi - v).max(0.0);
    Ok(OptEstimate {
        value: flip(c.value),
        direction: Direction::UpperOfInf,
        history: c.history.iter().map(|&v| flip(v)).collect(),
        ..c
    })
}
