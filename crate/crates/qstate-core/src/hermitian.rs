//! Dense Hermitian matrices and their spectral calculus.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{QError, QResult};
use crate::real::Real;
use crate::MAX_DIM;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Eigenvalues closer than this (relative to the spectral radius) are treated as one
/// degenerate level by the fixed-basis tie-break.
pub const DEGENERACY_TOL: f64 = 1e-11;
/// Eigenvalues in `[-PSD_CLIP, 0)` are read as zero.
pub const PSD_CLIP: f64 = 1e-10;
const SELECT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Checks `max |M - M†| <= 1e-12 * max|M|` and stores the exactly Hermitian part.
    pub fn new(m: CMatrix<T>) -> QResult<Self> {
        if !m.is_square() {
            return Err(QError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(QError::InvalidState("empty matrix".into()));
        }
        if m.nrows() > MAX_DIM {
            return Err(QError::TooLarge(m.nrows()));
        }
        let asym = max_asymmetry(&m);
        let scale = max_abs(&m);
        if asym > T::tol(1e-12) * scale {
            return Err(QError::NotHermitian { asymmetry: asym.as_f64() });
        }
        Ok(Self { m: hermitize(m) })
    }

    /// Takes the Hermitian part without checking how far `m` was from it.
    pub fn from_matrix_unchecked(m: CMatrix<T>) -> Self {
        debug_assert!(m.is_square());
        Self { m: hermitize(m) }
    }

    pub fn from_real_diagonal(d: &[T]) -> Self {
        let n = d.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        Self { m }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: CMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.m[(i, i)].re)
    }

    pub fn max_norm(&self) -> T {
        max_abs(&self.m)
    }

    pub fn scale(&self, s: T) -> Self {
        Self { m: self.m.map(|z| z * s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// `Tr(self * other)` for Hermitian arguments (real up to rounding).
    pub fn trace_product(&self, other: &Self) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re;
            }
        }
        acc
    }
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()))
}

pub fn max_asymmetry<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm_sqr().sqrt());
        }
    }
    worst
}

fn hermitize<T: Real>(mut m: CMatrix<T>) -> CMatrix<T> {
    let n = m.nrows();
    let half = T::c(0.5);
    for i in 0..n {
        m[(i, i)] = Complex::new(m[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let a = (m[(i, j)] + m[(j, i)].conj()) * half;
            m[(i, j)] = a;
            m[(j, i)] = a.conj();
        }
    }
    m
}

/// Spectral decomposition with eigenvalues in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U f(Λ) U†`.
    pub fn rebuild(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for k in 0..n {
            let fk = f(self.eigenvalues[k]);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        &scaled * u.adjoint()
    }

    pub fn vector(&self, k: usize) -> CVector<T> {
        self.eigenvectors.column(k).into_owned()
    }

    /// Eigenvalues with values in `[-PSD_CLIP, 0)` set to zero.
    pub fn clipped(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|&x| clip(x)).collect()
    }
}

pub(crate) fn clip<T: Real>(x: T) -> T {
    if x < T::zero() && x >= -T::c(PSD_CLIP) {
        T::zero()
    } else {
        x
    }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Degenerate levels get a deterministic basis: a fixed reference basis e_0, e_1, ...
/// is projected into the eigenspace and orthonormalised in reference order, skipping
/// vectors whose projection vanishes. Nondegenerate eigenvectors follow the same rule,
/// which pins their phase.
pub fn eigh<T: Real>(h: &HermitianMatrix<T>) -> EigenDecomposition<T> {
    eigh_matrix(h.matrix())
}

/// As [`eigh`], on a raw matrix assumed Hermitian.
pub fn eigh_matrix<T: Real>(m: &CMatrix<T>) -> EigenDecomposition<T> {
    let n = m.nrows();
    let (raw_vals, raw_vecs) = guarded_eigen(m, true);
    let raw_vecs = raw_vecs.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw_vals[b]
            .partial_cmp(&raw_vals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals: Vec<T> = order.iter().map(|&i| raw_vals[i]).collect();
    let scale = vals.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let gtol = T::tol(DEGENERACY_TOL) * scale;

    let mut vecs = CMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end - 1] - vals[end] <= gtol {
            end += 1;
        }
        let k = end - start;
        let mut vg = CMatrix::zeros(n, k);
        for (c, &src) in order[start..end].iter().enumerate() {
            vg.set_column(c, &raw_vecs.column(src));
        }
        let q = reference_frame(&vg);
        let block = &vg * q;
        for c in 0..k {
            vecs.set_column(start + c, &block.column(c));
        }
        start = end;
    }
    EigenDecomposition { eigenvalues: vals, eigenvectors: vecs }
}

/// nalgebra's implicit QR can break down (inf/NaN eigenvalues) on matrices
/// whose diagonal is mostly zero with tiny couplings. A result that is not
/// finite or misses the trace is redone on `m + sI`, which has the same
/// eigenvectors; the absolute accuracy stays at rounding times the norm.
fn guarded_eigen<T: Real>(m: &CMatrix<T>, vectors: bool) -> (Vec<T>, Option<CMatrix<T>>) {
    let n = m.nrows();
    let trace = (0..n).fold(T::zero(), |a, i| a + m[(i, i)].re);
    let scale = max_abs(m).max(T::c(f64::MIN_POSITIVE));
    let slack = T::tol(1e-8) * scale * T::c(n as f64);
    let shifts = [0.0, 1.0, std::f64::consts::E, 10.0];
    let mut last = None;
    for &k in &shifts {
        let s = scale * T::c(k);
        let work = if k == 0.0 { m.clone() } else { m + CMatrix::<T>::identity(n, n).scale(s) };
        let (vals, vecs) = if vectors {
            let se = SymmetricEigen::new(work);
            (se.eigenvalues, Some(se.eigenvectors))
        } else {
            (work.symmetric_eigenvalues(), None)
        };
        let vals: Vec<T> = vals.iter().map(|&v| v - s).collect();
        let sum = vals.iter().fold(T::zero(), |a, &v| a + v);
        if vals.iter().all(|v| v.is_finite()) && (sum - trace).abs() <= slack {
            return (vals, vecs);
        }
        last = Some((vals, vecs));
    }
    last.expect("at least one attempt")
}

/// Coordinates (in the basis `vg`) of the ordered basis obtained from the fixed basis.
fn reference_frame<T: Real>(vg: &CMatrix<T>) -> CMatrix<T> {
    let n = vg.nrows();
    let k = vg.ncols();
    let thr = T::tol(SELECT_TOL);
    let mut chosen: Vec<CVector<T>> = Vec::with_capacity(k);
    let residual = |i: usize, chosen: &[CVector<T>]| -> CVector<T> {
        // P e_i in coordinates is the conjugated i-th row of vg.
        let mut r = CVector::from_iterator(k, (0..k).map(|c| vg[(i, c)].conj()));
        for _ in 0..2 {
            for q in chosen {
                let ov = q.dotc(&r);
                r -= q * ov;
            }
        }
        r
    };
    for i in 0..n {
        if chosen.len() == k {
            break;
        }
        let r = residual(i, &chosen);
        let nr = r.norm();
        if nr > thr {
            chosen.push(r.unscale(nr));
        }
    }
    while chosen.len() < k {
        // Only reachable through severe rounding: take the best remaining direction.
        let (r, nr) = (0..n)
            .map(|i| {
                let r = residual(i, &chosen);
                let nr = r.norm();
                (r, nr)
            })
            .fold(None::<(CVector<T>, T)>, |best, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            })
            .expect("nonempty");
        chosen.push(r.unscale(nr));
    }
    let mut q = CMatrix::zeros(k, k);
    for (c, v) in chosen.iter().enumerate() {
        q.set_column(c, v);
    }
    q
}

/// Eigenvalues only, nonincreasing. Cheaper than [`eigh`].
pub fn eigvalsh<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    let mut vals: Vec<T> = match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let half = T::c(0.5);
            let mean = (a + d) * half;
            let diff = (a - d) * half;
            let rad = (diff * diff + b.norm_sqr()).sqrt();
            vec![mean + rad, mean - rad]
        }
        _ => guarded_eigen(m, false).0,
    };
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// `U f(Λ) U†` where `f` sees clipped eigenvalues; `None` from `f` is a domain error.
pub fn matrix_function<T: Real>(
    h: &HermitianMatrix<T>,
    f: impl Fn(T) -> Option<T>,
) -> QResult<HermitianMatrix<T>> {
    let e = eigh(h);
    let mut fv = Vec::with_capacity(e.dim());
    for &x in &e.eigenvalues {
        fv.push(f(clip(x)).ok_or(QError::Domain(x.as_f64()))?);
    }
    let n = e.dim();
    let mut scaled = e.eigenvectors.clone();
    for k in 0..n {
        for i in 0..n {
            scaled[(i, k)] *= fv[k];
        }
    }
    Ok(HermitianMatrix::from_matrix_unchecked(&scaled * e.eigenvectors.adjoint()))
}

/// Square root of a PSD matrix (eigenvalues below zero after clipping are rejected).
pub fn sqrt_psd<T: Real>(h: &HermitianMatrix<T>) -> QResult<HermitianMatrix<T>> {
    matrix_function(h, |x| if x >= T::zero() { Some(x.sqrt()) } else { None })
}

/// `(M_+, M_-)` with `M = M_+ - M_-`, both PSD with orthogonal supports.
pub fn positive_negative_parts<T: Real>(
    h: &HermitianMatrix<T>,
) -> (HermitianMatrix<T>, HermitianMatrix<T>) {
    let e = eigh(h);
    let plus = e.rebuild(|x| if x > T::zero() { x } else { T::zero() });
    let minus = e.rebuild(|x| if x < T::zero() { -x } else { T::zero() });
    (
        HermitianMatrix::from_matrix_unchecked(plus),
        HermitianMatrix::from_matrix_unchecked(minus),
    )
}

/// Sum of absolute eigenvalues.
pub fn trace_norm<T: Real>(m: &CMatrix<T>) -> T {
    eigvalsh(m).iter().fold(T::zero(), |acc, x| acc + x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> HermitianMatrix<f64> {
        HermitianMatrix::from_real_diagonal(d)
    }

    #[test]
    fn diagonal_sorted() {
        let e = eigh(&diag(&[0.2, 0.5, 0.3]));
        assert_eq!(e.eigenvalues.len(), 3);
        for (a, b) in e.eigenvalues.iter().zip([0.5, 0.3, 0.2]) {
            assert!((a - b).abs() < 1e-15);
        }
        // eigenvector of 0.5 is e_1
        assert!((e.eigenvectors[(1, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_uses_reference_basis() {
        let e = eigh(&HermitianMatrix::<f64>::identity(4));
        let i4 = CMatrix::<f64>::identity(4, 4);
        assert!((&e.eigenvectors - i4).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn degenerate_block_tie_break() {
        // diag(0.4, 0.4, 0.2) rotated inside the degenerate block still yields e_0, e_1.
        let s = 0.5f64.sqrt();
        let mut u = CMatrix::<f64>::identity(3, 3);
        u[(0, 0)] = Complex::new(s, 0.0);
        u[(0, 1)] = Complex::new(0.0, s);
        u[(1, 0)] = Complex::new(0.0, s);
        u[(1, 1)] = Complex::new(s, 0.0);
        let d = diag(&[0.4, 0.4, 0.2]).into_matrix();
        let m = &u * d * u.adjoint();
        let e = eigh_matrix(&m);
        assert!((e.eigenvectors[(0, 0)] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!((e.eigenvectors[(1, 1)] - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 8, 17] {
            let h = random_hermitian::<f64, _>(n, &mut rng);
            let e = eigh(&h);
            let back = e.rebuild(|x| x);
            let err = max_abs(&(&back - h.matrix()));
            assert!(err <= 1e-10 * h.max_norm(), "n={n} err={err}");
            let uu = e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!(max_abs(&(uu - CMatrix::identity(n, n))) < 1e-10);
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let fast = eigvalsh(h.matrix());
            for (a, b) in fast.iter().zip(&e.eigenvalues) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian::<f64, _>(6, &mut rng);
        assert_eq!(eigh(&h), eigh(&h));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = Complex::new(0.5, 0.0);
        match HermitianMatrix::new(m) {
            Err(QError::NotHermitian { asymmetry }) => assert!((asymmetry - 0.5).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn functions() {
        let r = sqrt_psd(&diag(&[4.0, 9.0])).unwrap();
        assert!((r.matrix()[(0, 0)].re - 2.0).abs() < 1e-14);
        assert!((r.matrix()[(1, 1)].re - 3.0).abs() < 1e-14);
        let eta = matrix_function(&diag(&[1.0, 0.0]), |x| {
            Some(if x > 0.0 { -x * x.ln() } else { 0.0 })
        })
        .unwrap();
        assert!(max_abs(eta.matrix()) < 1e-15);
        let ex = matrix_function(&diag(&[0.0, 1.0]), |x| Some((-x).exp())).unwrap();
        assert!((ex.matrix()[(1, 1)].re - (-1f64).exp()).abs() < 1e-15);
        assert!(matches!(
            matrix_function(&diag(&[-1.0, 1.0]), |x| if x > 0.0 { Some(x.ln()) } else { None }),
            Err(QError::Domain(_))
        ));
        // tiny negatives are clipped before f sees them
        assert!(sqrt_psd(&diag(&[-1e-12, 1.0])).is_ok());
    }

    #[test]
    fn pos_neg_parts() {
        let (p, m) = positive_negative_parts(&diag(&[1.0, -2.0]));
        assert!((p.matrix()[(0, 0)].re - 1.0).abs() < 1e-15 && p.matrix()[(1, 1)].norm() < 1e-15);
        assert!((m.matrix()[(1, 1)].re - 2.0).abs() < 1e-15 && m.matrix()[(0, 0)].norm() < 1e-15);
        let (p, m) = positive_negative_parts(&HermitianMatrix::<f64>::zeros(3));
        assert!(max_abs(p.matrix()) == 0.0 && max_abs(m.matrix()) == 0.0);
    }

    #[test]
    fn single_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian::<f32, _>(5, &mut rng);
        let e = eigh(&h);
        let err = max_abs(&(&e.rebuild(|x| x) - h.matrix()));
        assert!(err < 1e-4 * h.max_norm());
    }

    // Rank-one block on a sparse index set plus a tiny diagonal: the plain QR
    // iteration returns non-finite eigenvalues here.
    #[test]
    fn sparse_tiny_couplings() {
        let n = 15;
        let q: Vec<f64> = (0..n).map(|k| 0.1f64.powi(k as i32)).collect();
        let z: f64 = q.iter().sum();
        let p: Vec<f64> = q.iter().map(|x| x / z).collect();
        let d = n * (n + 1);
        let mut m = CMatrix::<f64>::zeros(d, d);
        for j in 0..n {
            for k in 0..n {
                m[(j * (n + 1) + j, k * (n + 1) + k)] = Complex::new(0.8 * (p[j] * p[k]).sqrt(), 0.0);
            }
            m[(j * (n + 1) + n, j * (n + 1) + n)] = Complex::new(0.2 * p[j], 0.0);
        }
        let vals = eigvalsh(&m);
        assert!(vals.iter().all(|v| v.is_finite()));
        assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((vals[0] - 0.8).abs() < 1e-12);
        let e = eigh_matrix(&m);
        let err = max_abs(&(&e.rebuild(|x| x) - &m));
        // levels closer than DEGENERACY_TOL are merged, which moves them by as much
        assert!(err < DEGENERACY_TOL, "{err:e}");
    }
}
