use num_complex::Complex;

use crate::error::{QError, QResult};
use crate::hermitian::{
    clip, eigh, eigvalsh, trace_norm, CMatrix, CVector, EigenDecomposition, HermitianMatrix,
};
use crate::layout::SystemLayout;
use crate::real::Real;

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues above this count toward the rank used by [`purify`].
pub const RANK_TOL: f64 = 1e-12;

/// Hermitian PSD unit-trace matrix on a labelled tensor layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: HermitianMatrix<T>,
    layout: SystemLayout,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: CMatrix<T>, layout: SystemLayout) -> QResult<Self> {
        let h = HermitianMatrix::new(m)?;
        Self::from_hermitian(h, layout)
    }

    pub fn from_hermitian(h: HermitianMatrix<T>, layout: SystemLayout) -> QResult<Self> {
        if h.dim() != layout.total_dim() {
            return Err(QError::InvalidState(format!(
                "matrix dim {} does not match layout {}",
                h.dim(),
                layout.describe()
            )));
        }
        let tr = h.trace();
        if (tr - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(QError::InvalidState(format!("trace {} != 1", tr.as_f64())));
        }
        let min = eigvalsh(h.matrix()).last().copied().unwrap_or(T::zero());
        if min < -T::tol(PSD_TOL) {
            return Err(QError::InvalidState(format!("negative eigenvalue {:e}", min.as_f64())));
        }
        Ok(Self { matrix: h, layout })
    }

    /// Caller guarantees a valid state; only the Hermitian part is taken.
    pub fn from_matrix_unchecked(m: CMatrix<T>, layout: SystemLayout) -> Self {
        debug_assert_eq!(m.nrows(), layout.total_dim());
        Self { matrix: HermitianMatrix::from_matrix_unchecked(m), layout }
    }

    pub fn from_hermitian_unchecked(h: HermitianMatrix<T>, layout: SystemLayout) -> Self {
        Self { matrix: h, layout }
    }

    /// `|v><v| / <v|v>`.
    pub fn from_pure(v: &CVector<T>, layout: SystemLayout) -> QResult<Self> {
        if v.len() != layout.total_dim() {
            return Err(QError::InvalidState("vector length does not match layout".into()));
        }
        if v.norm() == T::zero() {
            return Err(QError::InvalidState("zero vector".into()));
        }
        Ok(Self::from_pure_unchecked(v, layout))
    }

    pub(crate) fn from_pure_unchecked(v: &CVector<T>, layout: SystemLayout) -> Self {
        let u = v.unscale(v.norm());
        Self::from_matrix_unchecked(&u * u.adjoint(), layout)
    }

    pub fn from_diagonal(p: &[T], layout: SystemLayout) -> QResult<Self> {
        Self::from_hermitian(HermitianMatrix::from_real_diagonal(p), layout)
    }

    /// Basis state `|k><k|`.
    pub fn basis(k: usize, layout: SystemLayout) -> QResult<Self> {
        let n = layout.total_dim();
        if k >= n {
            return Err(QError::InvalidState(format!("basis index {k} >= {n}")));
        }
        let mut d = vec![T::zero(); n];
        d[k] = T::one();
        Ok(Self::from_hermitian_unchecked(HermitianMatrix::from_real_diagonal(&d), layout))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn hermitian(&self) -> &HermitianMatrix<T> {
        &self.matrix
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        self.matrix.matrix()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    pub fn eigh(&self) -> EigenDecomposition<T> {
        eigh(&self.matrix)
    }

    /// Nonincreasing spectrum with tiny negatives clipped.
    pub fn spectrum(&self) -> Vec<T> {
        eigvalsh(self.matrix()).into_iter().map(clip).collect()
    }

    pub fn purity(&self) -> T {
        self.matrix.trace_product(&self.matrix)
    }

    /// Same matrix, new layout of equal total dimension.
    pub fn with_layout(&self, layout: SystemLayout) -> QResult<Self> {
        if layout.total_dim() != self.dim() {
            return Err(QError::LayoutMismatch(self.layout.describe(), layout.describe()));
        }
        Ok(Self { matrix: self.matrix.clone(), layout })
    }

    /// `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &Self, p: T) -> QResult<Self> {
        same_layout(self, other)?;
        let m = self.matrix().map(|z| z * p) + other.matrix().map(|z| z * (T::one() - p));
        Ok(Self::from_matrix_unchecked(m, self.layout.clone()))
    }

    /// Convex combination of states on one layout; weights must sum to one.
    pub fn convex(items: &[(T, &Self)]) -> QResult<Self> {
        let first = items.first().ok_or_else(|| QError::InvalidEnsemble("empty".into()))?.1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (p, s) in items {
            same_layout(first, s)?;
            m += s.matrix().map(|z| z * *p);
        }
        Ok(Self::from_matrix_unchecked(m, first.layout.clone()))
    }

    pub fn marginal(&self, keep: &[&str]) -> QResult<Self> {
        partial_trace(self, keep)
    }
}

pub fn same_layout<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> QResult<()> {
    if a.layout != b.layout {
        return Err(QError::LayoutMismatch(a.layout.describe(), b.layout.describe()));
    }
    Ok(())
}

/// Probability-weighted family of states on a common layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T: Real> {
    items: Vec<(T, DensityMatrix<T>)>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(items: Vec<(T, DensityMatrix<T>)>) -> QResult<Self> {
        let first = items.first().ok_or_else(|| QError::InvalidEnsemble("empty".into()))?;
        let layout = first.1.layout().clone();
        let mut total = T::zero();
        for (p, s) in &items {
            if *p < T::zero() || *p > T::one() {
                return Err(QError::InvalidEnsemble(format!("probability {}", p.as_f64())));
            }
            if *s.layout() != layout {
                return Err(QError::LayoutMismatch(layout.describe(), s.layout().describe()));
            }
            total += *p;
        }
        if (total - T::one()).abs() > T::tol(1e-10) {
            return Err(QError::InvalidEnsemble(format!("probabilities sum to {}", total.as_f64())));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(T, DensityMatrix<T>)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.items.iter().map(|(p, _)| *p).collect()
    }

    pub fn layout(&self) -> &SystemLayout {
        self.items[0].1.layout()
    }

    pub fn average(&self) -> DensityMatrix<T> {
        let refs: Vec<(T, &DensityMatrix<T>)> = self.items.iter().map(|(p, s)| (*p, s)).collect();
        DensityMatrix::convex(&refs).expect("validated ensemble")
    }
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn tensor<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> QResult<DensityMatrix<T>> {
    let layout = a.layout.concat(&b.layout)?;
    Ok(DensityMatrix::from_matrix_unchecked(kron(a.matrix(), b.matrix()), layout))
}

/// Reduced matrix over the parts flagged in `keep` (layout order). Works on any square
/// matrix whose size is the product of `dims`.
pub fn partial_trace_matrix<T: Real>(m: &CMatrix<T>, dims: &[usize], keep: &[bool]) -> CMatrix<T> {
    let n: usize = dims.iter().product();
    debug_assert_eq!(m.nrows(), n);
    let dk: usize = dims.iter().zip(keep).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let dt = n / dk;
    // full index for each (kept multi-index, traced multi-index)
    let mut full = vec![0usize; dk * dt];
    for (idx, slot) in full.iter_mut().enumerate() {
        let (mut r, mut t) = (idx / dt, idx % dt);
        let mut f = 0usize;
        let mut stride = 1usize;
        for (i, &d) in dims.iter().enumerate().rev() {
            let digit = if keep[i] {
                let x = r % d;
                r /= d;
                x
            } else {
                let x = t % d;
                t /= d;
                x
            };
            f += digit * stride;
            stride *= d;
        }
        *slot = f;
    }
    let mut out = CMatrix::zeros(dk, dk);
    for c in 0..dk {
        for r in 0..dk {
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in 0..dt {
                acc += m[(full[r * dt + t], full[c * dt + t])];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: &[&str]) -> QResult<DensityMatrix<T>> {
    if keep.is_empty() {
        return Err(QError::InvalidLayout("nothing kept".into()));
    }
    let mask = rho.layout.mask(keep)?;
    let layout = rho.layout.select(&mask)?;
    let m = partial_trace_matrix(rho.matrix(), &rho.layout.dims(), &mask);
    Ok(DensityMatrix::from_matrix_unchecked(m, layout))
}

/// Pure state on `layout ⊗ ref_label` whose marginal is `rho`; the reference dimension
/// is the rank of `rho`.
pub fn purify<T: Real>(rho: &DensityMatrix<T>, ref_label: &str) -> QResult<DensityMatrix<T>> {
    let e = rho.eigh();
    let thr = T::tol(RANK_TOL);
    let rank = e.eigenvalues.iter().filter(|&&x| x > thr).count().max(1);
    let layout = rho.layout.concat(&SystemLayout::single(ref_label, rank)?)?;
    let n = rho.dim();
    let mut psi = CVector::zeros(n * rank);
    for k in 0..rank {
        let w = clip(e.eigenvalues[k]).max(T::zero()).sqrt();
        for i in 0..n {
            psi[i * rank + k] = e.eigenvectors[(i, k)] * w;
        }
    }
    DensityMatrix::from_pure(&psi, layout)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> QResult<T> {
    same_layout(rho, sigma)?;
    let d = rho.matrix() - sigma.matrix();
    Ok((trace_norm(&d) * T::c(0.5)).min(T::one()))
}

/// `‖√ρ √σ‖₁²`, evaluated as the nuclear norm of `A†B` for factors `ρ = AA†`,
/// `σ = BB†` built from the numerically nonzero part of each spectrum. Going through the
/// factors avoids taking square roots of rounding-level eigenvalues.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> QResult<T> {
    same_layout(rho, sigma)?;
    let a = psd_factor(rho);
    let b = psd_factor(sigma);
    let m = a.adjoint() * b;
    let f = nalgebra::SVD::new(m, false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &x| acc + x);
    Ok((f * f).min(T::one()).max(T::zero()))
}

fn psd_factor<T: Real>(s: &DensityMatrix<T>) -> CMatrix<T> {
    let e = s.eigh();
    let n = s.dim();
    let top = e.eigenvalues.first().copied().unwrap_or(T::zero()).max(T::zero());
    let cut = T::default_epsilon() * T::c(64.0 * n as f64) * top;
    let keep: Vec<usize> = (0..n).filter(|&k| e.eigenvalues[k] > cut).collect();
    let mut f = CMatrix::zeros(n, keep.len().max(1));
    for (c, &k) in keep.iter().enumerate() {
        let w = e.eigenvalues[k].sqrt();
        for i in 0..n {
            f[(i, c)] = e.eigenvectors[(i, k)] * w;
        }
    }
    f
}

fn classical_register<T: Real>(n: usize, label: &str) -> QResult<SystemLayout> {
    SystemLayout::single(label, n)
}

/// `Σ p_i ρ_i ⊗ |i><i|` with the register last.
pub fn qc_state<T: Real>(e: &Ensemble<T>, class_label: &str) -> QResult<DensityMatrix<T>> {
    let n = e.len();
    let layout = e.layout().concat(&classical_register::<T>(n, class_label)?)?;
    let d = e.layout().total_dim();
    let mut m = CMatrix::zeros(d * n, d * n);
    for (i, (p, s)) in e.items().iter().enumerate() {
        for c in 0..d {
            for r in 0..d {
                m[(r * n + i, c * n + i)] = s.matrix()[(r, c)] * *p;
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(m, layout))
}

/// `Σ p_i |i><i| ⊗ ρ_i` with the register first.
pub fn cq_state<T: Real>(e: &Ensemble<T>, class_label: &str) -> QResult<DensityMatrix<T>> {
    let n = e.len();
    let layout = classical_register::<T>(n, class_label)?.concat(e.layout())?;
    let d = e.layout().total_dim();
    let mut m = CMatrix::zeros(d * n, d * n);
    for (i, (p, s)) in e.items().iter().enumerate() {
        for c in 0..d {
            for r in 0..d {
                m[(i * d + r, i * d + c)] = s.matrix()[(r, c)] * *p;
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(m, layout))
}

/// `(1/d) Σ_ij |ii><jj|` on `A:d, B:d`.
pub fn maximally_entangled<T: Real>(d: usize) -> QResult<DensityMatrix<T>> {
    if d < 2 {
        return Err(QError::InvalidLayout("maximally entangled state needs d >= 2".into()));
    }
    let layout = SystemLayout::new([("A", d), ("B", d)])?;
    let mut v = CVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = Complex::new(T::one(), T::zero());
    }
    DensityMatrix::from_pure(&v, layout)
}

/// `I / dim`.
pub fn chaotic<T: Real>(layout: &SystemLayout) -> DensityMatrix<T> {
    let n = layout.total_dim();
    let p = T::one() / T::c(n as f64);
    DensityMatrix::from_hermitian_unchecked(HermitianMatrix::from_real_diagonal(&vec![p; n]), layout.clone())
}
