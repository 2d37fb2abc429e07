//! Smooth charts onto isometries `V` (rows x cols, `V^dag V = I`).

use qstate_core::{eigh_matrix, Mat, C64};

pub fn param_count(rows: usize, cols: usize) -> usize {
    2 * rows * cols
}

/// Condition number (of `X^dag X`) beyond which `X` is nudged.
const GRAM_COND: f64 = 1e-10;

/// `X (X^dag X)^{-1/2}` with `X` read row-major from (re, im) pairs. The
/// polar factor is invariant under `X -> X G`, `G > 0`, and equals `X`
/// whenever `X` is already an isometry. Rank-deficient `X` is moved toward
/// `[I; 0]` first, so the result is always an isometry.
pub fn isometry(params: &[f64], rows: usize, cols: usize) -> Mat {
    debug_assert_eq!(params.len(), param_count(rows, cols));
    assert!(rows >= cols, "isometry needs rows >= cols");
    let mut x = Mat::from_fn(rows, cols, |r, c| {
        let k = 2 * (r * cols + c);
        C64::new(params[k], params[k + 1])
    });
    let pad = Mat::from_fn(rows, cols, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let mut nudge = 1e-6;
    loop {
        let gram = x.adjoint() * &x;
        let eig = eigh_matrix(&gram);
        let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
        let low = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if top.is_finite() && top > 0.0 && low > GRAM_COND * top {
            // A second polar step on the now well-conditioned factor
            // removes the rounding of the first.
            let v = &x * eig.rebuild(|l| 1.0 / l.sqrt());
            let e2 = eigh_matrix(&(v.adjoint() * &v));
            return &v * e2.rebuild(|l| 1.0 / l.sqrt());
        }
        if !(top.is_finite() && top > 0.0) || nudge > 1.0 {
            return pad;
        }
        x += &pad * C64::new(nudge * top.sqrt(), 0.0);
        nudge *= 100.0;
    }
}

pub fn params_of(v: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.nrows() * v.ncols());
    for r in 0..v.nrows() {
        for c in 0..v.ncols() {
            out.push(v[(r, c)].re);
            out.push(v[(r, c)].im);
        }
    }
    out
}
