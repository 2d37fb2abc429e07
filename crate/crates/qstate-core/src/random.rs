//! Seeded samplers: Ginibre matrices, Haar unitaries, random states.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{QError, QResult};
use crate::hermitian::{CMatrix, CVector, HermitianMatrix};
use crate::layout::SystemLayout;
use crate::real::Real;
use crate::state::DensityMatrix;

pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::c(re), T::c(im))
}

pub fn ginibre<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    // column-major fill order keeps streams stable across nalgebra versions
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_normal(rng);
        }
    }
    m
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix<T> {
    let g = ginibre::<T, R>(n, n, rng);
    HermitianMatrix::from_matrix_unchecked(&g + g.adjoint())
}

/// Haar-distributed isometry with `cols <= rows` orthonormal columns.
pub fn random_isometry<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    assert!(cols <= rows && cols > 0);
    orthonormalize_columns(ginibre(rows, cols, rng))
}

pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    random_isometry(n, n, rng)
}

/// Modified Gram-Schmidt with re-orthogonalisation. Applied to a Ginibre matrix this
/// gives the Haar measure (equivalent to QR with the R diagonal made positive).
pub fn orthonormalize_columns<T: Real>(mut m: CMatrix<T>) -> CMatrix<T> {
    let cols = m.ncols();
    for c in 0..cols {
        for _ in 0..2 {
            for p in 0..c {
                let q = m.column(p).into_owned();
                let ov = q.dotc(&m.column(c));
                let mut col = m.column_mut(c);
                col -= q * ov;
            }
        }
        let nrm = m.column(c).norm();
        let nrm = if nrm > T::zero() { nrm } else { T::one() };
        let mut col = m.column_mut(c);
        col.unscale_mut(nrm);
    }
    m
}

pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector<T> {
    let v = CVector::from_iterator(n, (0..n).map(|_| complex_normal::<T, R>(rng)));
    let nrm = v.norm();
    v.unscale(nrm)
}

pub fn random_pure_with<T: Real, R: Rng + ?Sized>(layout: &SystemLayout, rng: &mut R) -> DensityMatrix<T> {
    let v = random_unit_vector::<T, R>(layout.total_dim(), rng);
    DensityMatrix::from_pure_unchecked(&v, layout.clone())
}

/// Partial trace of a random pure state on `dim x rank`.
pub fn random_mixed_with<T: Real, R: Rng + ?Sized>(
    layout: &SystemLayout,
    rank: usize,
    rng: &mut R,
) -> QResult<DensityMatrix<T>> {
    let n = layout.total_dim();
    if rank == 0 || rank > n {
        return Err(QError::RankOutOfRange { rank, max: n });
    }
    let g = ginibre::<T, R>(n, rank, rng);
    let m = &g * g.adjoint();
    let tr = (0..n).fold(T::zero(), |a, i| a + m[(i, i)].re);
    Ok(DensityMatrix::from_matrix_unchecked(m.unscale(tr), layout.clone()))
}

pub fn random_pure<T: Real>(layout: &SystemLayout, seed: u64) -> DensityMatrix<T> {
    random_pure_with(layout, &mut rng_from_seed(seed))
}

pub fn random_mixed<T: Real>(layout: &SystemLayout, rank: usize, seed: u64) -> QResult<DensityMatrix<T>> {
    random_mixed_with(layout, rank, &mut rng_from_seed(seed))
}

/// Uniform point of the probability simplex with `n` entries.
pub fn random_probabilities<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w.into_iter().map(T::c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::max_abs;

    #[test]
    fn isometry_orthonormal() {
        let mut rng = rng_from_seed(1);
        let v = random_isometry::<f64, _>(7, 3, &mut rng);
        let g = v.adjoint() * &v;
        assert!(max_abs(&(g - CMatrix::identity(3, 3))) < 1e-13);
    }

    #[test]
    fn reproducible() {
        let l = SystemLayout::from_dims(&[2, 3]).unwrap();
        let a: DensityMatrix<f64> = random_mixed(&l, 2, 42).unwrap();
        let b: DensityMatrix<f64> = random_mixed(&l, 2, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(random_mixed::<f64>(&l, 7, 1).is_err());
    }
}
