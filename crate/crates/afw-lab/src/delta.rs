use qstate_core::random::random_unitary;
use qstate_core::hermitian::max_abs;
use qstate_core::{positive_negative_parts, random_mixed_with, same_layout, Density, Hermitian, Mat, SystemLayout};
use rand::Rng;

use crate::{AfwError, AfwResult};

/// `Tr(tau+ tau-)` allowed by [`u_states`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Below this trace distance two states count as equal.
const IDENTICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTriple {
    pub tau_plus: Density,
    pub tau_minus: Density,
    pub epsilon: f64,
}

/// `tau+- = eps^-1 [rho - sigma]_+-` with `eps = 1/2 ||rho - sigma||_1`.
pub fn delta_states(rho: &Density, sigma: &Density) -> AfwResult<DeltaTriple> {
    same_layout(rho, sigma)?;
    let diff = Hermitian::from_matrix_unchecked(rho.matrix() - sigma.matrix());
    let (plus, minus) = positive_negative_parts(&diff);
    // the two traces agree up to Tr(rho - sigma) ~ rounding
    let eps = 0.5 * (plus.trace() + minus.trace());
    if eps <= IDENTICAL_TOL {
        return Err(AfwError::Identical(eps));
    }
    let layout = rho.layout().clone();
    Ok(DeltaTriple {
        tau_plus: Density::from_hermitian_unchecked(plus.scale(1.0 / eps), layout.clone()),
        tau_minus: Density::from_hermitian_unchecked(minus.scale(1.0 / eps), layout),
        epsilon: eps,
    })
}

/// Max-norm defect of `(rho + eps tau-) / (1 + eps) = (sigma + eps tau+) / (1 + eps)`.
pub fn omega_star_check(rho: &Density, sigma: &Density) -> AfwResult<f64> {
    let t = delta_states(rho, sigma)?;
    let e = t.epsilon;
    let lhs: Mat = rho.matrix() + t.tau_minus.matrix().scale(e);
    let rhs: Mat = sigma.matrix() + t.tau_plus.matrix().scale(e);
    Ok(max_abs(&(lhs - rhs)) / (1.0 + e))
}

/// `rho = (1+eps)/2 tau+ + (1-eps)/2 tau-` and the mirrored `sigma`, at trace
/// distance exactly `eps` when the supports are orthogonal.
pub fn u_states(tau_plus: &Density, tau_minus: &Density, eps: f64) -> AfwResult<(Density, Density)> {
    same_layout(tau_plus, tau_minus)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(AfwError::Domain(format!("eps = {eps} outside (0, 1]")));
    }
    let overlap = tau_plus.hermitian().trace_product(tau_minus.hermitian());
    if overlap > ORTHOGONALITY_TOL {
        return Err(AfwError::NotOrthogonal { overlap });
    }
    let (a, b) = (0.5 * (1.0 + eps), 0.5 * (1.0 - eps));
    Ok((tau_plus.mix(tau_minus, a)?, tau_plus.mix(tau_minus, b)?))
}

/// Random mixed states with orthogonal supports: a Haar basis split into two
/// blocks, each carrying a random full-rank state.
pub fn random_orthogonal_taus<R: Rng + ?Sized>(layout: &SystemLayout, rng: &mut R) -> AfwResult<(Density, Density)> {
    let n = layout.total_dim();
    if n < 2 {
        return Err(AfwError::Domain("tau+- need a space of dimension >= 2".into()));
    }
    let k = rng.random_range(1..n);
    let u: Mat = random_unitary(n, rng);
    let block = |cols: std::ops::Range<usize>, rng: &mut R| -> AfwResult<Density> {
        let m = cols.len();
        let inner = random_mixed_with::<f64, R>(&SystemLayout::single("X", m)?, m, rng)?;
        let v = u.columns(cols.start, m);
        let full: Mat = &v * inner.matrix() * v.adjoint();
        Ok(Density::from_matrix_unchecked(full, layout.clone()))
    };
    let plus = block(0..k, rng)?;
    let minus = block(k..n, rng)?;
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qstate_core::{chaotic, maximally_entangled, random_mixed, rng_from_seed};

    fn diag(p: &[f64]) -> Density {
        Density::from_diagonal(p, SystemLayout::single("A", p.len()).unwrap()).unwrap()
    }

    #[test]
    fn orthogonal_basis_pair() {
        let t = delta_states(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap();
        assert!((t.epsilon - 1.0).abs() < 1e-15);
        assert!(max_abs(&(t.tau_plus.matrix() - diag(&[1.0, 0.0]).matrix())) < 1e-15);
        assert!(max_abs(&(t.tau_minus.matrix() - diag(&[0.0, 1.0]).matrix())) < 1e-15);
    }

    #[test]
    fn max_entangled_against_chaotic() {
        let d = 3;
        let rho = maximally_entangled::<f64>(d).unwrap();
        let sigma = chaotic::<f64>(rho.layout());
        let t = delta_states(&rho, &sigma).unwrap();
        let n = (d * d) as f64;
        assert!((t.epsilon - (1.0 - 1.0 / n)).abs() < 1e-13);
        assert!(max_abs(&(t.tau_plus.matrix() - rho.matrix())) < 1e-12);
        // (I - P_psi) / (d^2 - 1)
        let want: Mat = (Mat::identity(d * d, d * d) - rho.matrix()).unscale(n - 1.0);
        assert!(max_abs(&(t.tau_minus.matrix() - want)) < 1e-12);
    }

    #[test]
    fn identical_states_rejected() {
        let r = diag(&[0.3, 0.7]);
        assert!(matches!(delta_states(&r, &r), Err(AfwError::Identical(_))));
        assert!(omega_star_check(&r, &r).is_err());
    }

    #[test]
    fn u_states_basic() {
        let (r, s) = u_states(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.5).unwrap();
        assert!(max_abs(&(r.matrix() - diag(&[0.75, 0.25]).matrix())) < 1e-15);
        assert!(max_abs(&(s.matrix() - diag(&[0.25, 0.75]).matrix())) < 1e-15);
        let (r, s) = u_states(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 1.0).unwrap();
        assert_eq!(r, diag(&[1.0, 0.0]));
        assert_eq!(s, diag(&[0.0, 1.0]));
        match u_states(&diag(&[0.5, 0.5]), &diag(&[0.0, 1.0]), 0.5) {
            Err(AfwError::NotOrthogonal { overlap }) => assert!((overlap - 0.5).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(u_states(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn random_qubit_and_diag_defects() {
        let l = SystemLayout::single("A", 2).unwrap();
        for seed in 0..50 {
            let r = random_mixed(&l, 2, seed).unwrap();
            let s = random_mixed(&l, 1, seed + 1000).unwrap();
            assert!(omega_star_check(&r, &s).unwrap() <= 1e-12);
        }
        assert!(omega_star_check(&diag(&[0.2, 0.3, 0.5]), &diag(&[0.6, 0.1, 0.3])).unwrap() <= 1e-15);
    }

    #[test]
    fn random_taus_are_orthogonal_states() {
        let mut rng = rng_from_seed(9);
        let l = SystemLayout::from_dims(&[2, 3]).unwrap();
        for _ in 0..20 {
            let (p, m) = random_orthogonal_taus(&l, &mut rng).unwrap();
            assert!(p.hermitian().trace_product(m.hermitian()).abs() < 1e-13);
            assert!((p.trace() - 1.0).abs() < 1e-13 && (m.trace() - 1.0).abs() < 1e-13);
            assert!(p.spectrum().iter().chain(m.spectrum().iter()).all(|&x| x > -1e-13));
        }
    }
}
