use qstate_core::{eigvalsh, partial_trace, same_layout, tensor, CMatrix, DensityMatrix, Ensemble, Real};

use crate::elementary::eta;
use crate::EntropicError;

/// Eigenspaces of `σ` below this eigenvalue count as outside its support.
pub const SUPPORT_EIG_TOL: f64 = 1e-10;
/// Escaped mass above this marks `supp ρ ⊄ supp σ`.
pub const SUPPORT_MASS_TOL: f64 = 1e-9;

type Res<T> = Result<T, EntropicError>;

pub fn entropy_of_spectrum<T: Real>(eigs: &[T]) -> T {
    eigs.iter().fold(T::zero(), |acc, &x| acc + eta(x))
}

/// Entropy of a raw PSD matrix, no trace normalisation.
pub fn matrix_entropy<T: Real>(m: &CMatrix<T>) -> T {
    entropy_of_spectrum(&eigvalsh(m))
}

pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    matrix_entropy(rho.matrix())
}

/// Quantum relative entropy, with `+∞` carried as its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelEntropy<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> RelEntropy<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, RelEntropy::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            RelEntropy::Finite(x) => Some(x),
            RelEntropy::Infinite => None,
        }
    }
}

/// `D(ρ‖σ) = Σ_i <i|ρ ln ρ − ρ ln σ|i>` in the eigenbasis of `ρ`.
pub fn relative_entropy<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Res<RelEntropy<T>> {
    same_layout(rho, sigma)?;
    Ok(relative_entropy_matrices(rho.matrix(), sigma.matrix()))
}

pub fn relative_entropy_matrices<T: Real>(rho: &CMatrix<T>, sigma: &CMatrix<T>) -> RelEntropy<T> {
    let er = eigh_psd(rho);
    let es = eigh_psd(sigma);
    let n = rho.nrows();
    let thr = T::c(SUPPORT_EIG_TOL);
    // overlaps |<u_i|v_j>|²
    let ov = er.1.adjoint() * &es.1;
    let mut escaped = T::zero();
    let mut cross = T::zero();
    for i in 0..n {
        let p = er.0[i];
        if p <= T::zero() {
            continue;
        }
        for j in 0..n {
            let w = ov[(i, j)].norm_sqr();
            let q = es.0[j];
            if q < thr {
                escaped += p * w;
            } else {
                cross += p * w * q.ln();
            }
        }
    }
    if escaped > T::c(SUPPORT_MASS_TOL) {
        return RelEntropy::Infinite;
    }
    let self_term = -entropy_of_spectrum(&er.0);
    RelEntropy::Finite((self_term - cross).max(T::zero()))
}

fn eigh_psd<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let e = qstate_core::eigh_matrix(m);
    let vals = e.clipped();
    (vals, e.eigenvectors)
}

fn check_disjoint(groups: &[&[&str]]) -> Res<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        for l in g.iter() {
            if seen.contains(l) {
                return Err(EntropicError::Partition(format!("label '{l}' appears in more than one part")));
            }
            seen.push(l);
        }
    }
    Ok(())
}

/// `S(ω_X)` for the union of the listed labels; the empty set gives 0.
pub fn marginal_entropy<T: Real>(omega: &DensityMatrix<T>, labels: &[&str]) -> Res<T> {
    if labels.is_empty() {
        return Ok(T::zero());
    }
    if labels.len() == omega.layout().len() {
        omega.layout().mask(labels)?;
        return Ok(von_neumann_entropy(omega));
    }
    Ok(von_neumann_entropy(&partial_trace(omega, labels)?))
}

fn union<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondForm {
    /// `S(AB) − S(B)`.
    Difference,
    /// `S(A) − D(ω_AB ‖ ω_A ⊗ ω_B)`.
    Extended,
}

pub fn conditional_entropy<T: Real>(omega: &DensityMatrix<T>, a: &[&str], b: &[&str], form: CondForm) -> Res<T> {
    check_disjoint(&[a, b])?;
    if a.is_empty() {
        return Err(EntropicError::Partition("conditional entropy needs a nonempty A".into()));
    }
    match form {
        CondForm::Difference => Ok(marginal_entropy(omega, &union(&[a, b]))? - marginal_entropy(omega, b)?),
        CondForm::Extended => {
            if b.is_empty() {
                return marginal_entropy(omega, a);
            }
            let ab = partial_trace(omega, &union(&[a, b]))?;
            let ra = partial_trace(&ab, a)?;
            let rb = partial_trace(&ab, b)?;
            let prod = tensor(&ra, &rb)?;
            // the product has the A labels first; put ω_AB in the same order
            let ab_ordered = reorder(&ab, &union(&[a, b]))?;
            let d = relative_entropy_matrices(ab_ordered.matrix(), prod.matrix())
                .finite()
                .ok_or_else(|| EntropicError::Partition("marginal product does not cover support".into()))?;
            Ok(von_neumann_entropy(&ra) - d)
        }
    }
}

/// State with parts permuted into the given label order.
pub fn reorder<T: Real>(omega: &DensityMatrix<T>, order: &[&str]) -> Res<DensityMatrix<T>> {
    let layout = omega.layout();
    if order.len() != layout.len() {
        return Err(EntropicError::Partition("reorder needs every label".into()));
    }
    let perm: Vec<usize> = order
        .iter()
        .map(|l| layout.index_of(l).ok_or_else(|| qstate_core::QError::UnknownLabel(l.to_string())))
        .collect::<Result<_, _>>()?;
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return Ok(omega.clone());
    }
    let dims = layout.dims();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_layout = qstate_core::SystemLayout::new(order.iter().zip(&new_dims).map(|(l, &d)| (l.to_string(), d)))?;
    let n = omega.dim();
    // map new flat index -> old flat index
    let mut map = vec![0usize; n];
    let mut old_strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut rem = idx;
        let mut old = 0;
        for k in (0..new_dims.len()).rev() {
            let digit = rem % new_dims[k];
            rem /= new_dims[k];
            old += digit * old_strides[perm[k]];
        }
        *slot = old;
    }
    let m = omega.matrix();
    let out = CMatrix::from_fn(n, n, |r, c| m[(map[r], map[c])]);
    Ok(DensityMatrix::from_matrix_unchecked(out, new_layout))
}

/// `I(A:B) = S(A) + S(B) − S(AB)`.
pub fn mutual_information<T: Real>(omega: &DensityMatrix<T>, a: &[&str], b: &[&str]) -> Res<T> {
    check_disjoint(&[a, b])?;
    Ok(marginal_entropy(omega, a)? + marginal_entropy(omega, b)? - marginal_entropy(omega, &union(&[a, b]))?)
}

/// `I(A:B|C) = S(AC) + S(BC) − S(ABC) − S(C)`.
pub fn conditional_mutual_information<T: Real>(
    omega: &DensityMatrix<T>,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Res<T> {
    check_disjoint(&[a, b, c])?;
    Ok(marginal_entropy(omega, &union(&[a, c]))? + marginal_entropy(omega, &union(&[b, c]))?
        - marginal_entropy(omega, &union(&[a, b, c]))?
        - marginal_entropy(omega, c)?)
}

/// Groups `A_1 ... A_n` and an optional conditioning set `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    pub groups: Vec<Vec<String>>,
    pub conditioning: Option<Vec<String>>,
}

impl PartitionSpec {
    pub fn new(groups: Vec<Vec<String>>, conditioning: Option<Vec<String>>) -> Res<Self> {
        let spec = Self { groups, conditioning };
        if spec.groups.len() < 2 {
            return Err(EntropicError::Partition("need at least two groups".into()));
        }
        if spec.groups.iter().any(|g| g.is_empty()) {
            return Err(EntropicError::Partition("empty group".into()));
        }
        let gs = spec.group_refs();
        let mut all: Vec<&[&str]> = gs.iter().map(|g| g.as_slice()).collect();
        let c = spec.cond_refs();
        all.push(&c);
        check_disjoint(&all)?;
        Ok(spec)
    }

    /// One single-label group per label.
    pub fn singletons(labels: &[&str], conditioning: Option<&[&str]>) -> Res<Self> {
        Self::new(
            labels.iter().map(|l| vec![l.to_string()]).collect(),
            conditioning.map(|c| c.iter().map(|s| s.to_string()).collect()),
        )
    }

    fn group_refs(&self) -> Vec<Vec<&str>> {
        self.groups.iter().map(|g| g.iter().map(String::as_str).collect()).collect()
    }

    fn cond_refs(&self) -> Vec<&str> {
        self.conditioning.iter().flatten().map(String::as_str).collect()
    }
}

/// `Σ_k S(ω_{A_k}) − S(ω_{A_1..A_n})` (conditioning set ignored).
pub fn multipartite_mi<T: Real>(omega: &DensityMatrix<T>, spec: &PartitionSpec) -> Res<T> {
    let gs = spec.group_refs();
    let mut acc = T::zero();
    for g in &gs {
        acc += marginal_entropy(omega, g)?;
    }
    let all: Vec<&str> = gs.iter().flatten().copied().collect();
    Ok(acc - marginal_entropy(omega, &all)?)
}

/// `Σ_k S(A_k C) − S(A_1..A_n C) − (n − 1) S(C)`.
pub fn multipartite_cmi<T: Real>(omega: &DensityMatrix<T>, spec: &PartitionSpec) -> Res<T> {
    let gs = spec.group_refs();
    let c = spec.cond_refs();
    let mut acc = T::zero();
    for g in &gs {
        let mut gc = g.clone();
        gc.extend(&c);
        acc += marginal_entropy(omega, &gc)?;
    }
    let mut all: Vec<&str> = gs.iter().flatten().copied().collect();
    all.extend(&c);
    let n = T::c(gs.len() as f64);
    Ok(acc - marginal_entropy(omega, &all)? - (n - T::one()) * marginal_entropy(omega, &c)?)
}

/// `χ = S(ρ̄) − Σ p_k S(ρ_k)`.
pub fn holevo_chi<T: Real>(e: &Ensemble<T>) -> T {
    let avg = e.average();
    let mean = e
        .items()
        .iter()
        .fold(T::zero(), |acc, (p, s)| acc + *p * von_neumann_entropy(s));
    (von_neumann_entropy(&avg) - mean).max(T::zero())
}

/// The same quantity written as `Σ p_k D(ρ_k ‖ ρ̄)`.
pub fn holevo_chi_relative<T: Real>(e: &Ensemble<T>) -> Res<T> {
    let avg = e.average();
    let mut acc = T::zero();
    for (p, s) in e.items() {
        if *p > T::zero() {
            acc += *p * relative_entropy(s, &avg)?.finite().unwrap_or(T::zero());
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elementary::binary_entropy;
    use qstate_core::{
        chaotic, maximally_entangled, qc_state, random_mixed, random_pure, CVector, Complex, Density, SystemLayout,
    };

    const LN2: f64 = std::f64::consts::LN_2;

    fn lay(d: &[usize]) -> SystemLayout {
        SystemLayout::from_dims(d).unwrap()
    }

    fn diag(p: &[f64]) -> Density {
        Density::from_diagonal(p, lay(&[p.len()])).unwrap()
    }

    fn ghz() -> Density {
        let mut v = CVector::zeros(8);
        v[0] = Complex::new(1.0, 0.0);
        v[7] = Complex::new(1.0, 0.0);
        Density::from_pure(&v, lay(&[2, 2, 2])).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let p: Density = random_pure(&lay(&[5]), 3);
        assert!(von_neumann_entropy(&p).abs() < 1e-10);
        for d in [2, 3, 7] {
            assert!((von_neumann_entropy(&chaotic::<f64>(&lay(&[d]))) - (d as f64).ln()).abs() < 1e-14);
        }
        let s = von_neumann_entropy(&diag(&[0.75, 0.25]));
        assert!((s - binary_entropy(0.25).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let r: Density = random_mixed(&lay(&[4]), 3, 8).unwrap();
        assert!(relative_entropy(&r, &r).unwrap().finite().unwrap().abs() < 1e-9);
        let d = relative_entropy(&diag(&[0.5, 0.5]), &diag(&[0.75, 0.25])).unwrap().finite().unwrap();
        // ½ ln(½/¾) + ½ ln(½/¼)
        let oracle = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln();
        assert!((d - oracle).abs() < 1e-14);
        assert!((oracle - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert_eq!(relative_entropy(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap(), RelEntropy::Infinite);
        // support inclusion in the other direction is fine
        assert!(relative_entropy(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5])).unwrap().is_finite());
    }

    #[test]
    fn conditional_entropy_examples() {
        let m = maximally_entangled::<f64>(2).unwrap();
        for form in [CondForm::Difference, CondForm::Extended] {
            assert!((conditional_entropy(&m, &["A"], &["B"], form).unwrap() + LN2).abs() < 1e-10);
        }
        let a: Density = random_mixed(&SystemLayout::single("A", 3).unwrap(), 2, 1).unwrap();
        let b: Density = random_mixed(&SystemLayout::single("B", 2).unwrap(), 2, 2).unwrap();
        let ab = qstate_core::tensor(&a, &b).unwrap();
        let s = conditional_entropy(&ab, &["A"], &["B"], CondForm::Extended).unwrap();
        assert!((s - von_neumann_entropy(&a)).abs() < 1e-10);
        // q-c state: Σ p_i S(ρ_i)
        let la = SystemLayout::single("A", 2).unwrap();
        let x: Density = random_mixed(&la, 2, 5).unwrap();
        let y: Density = random_mixed(&la, 2, 6).unwrap();
        let e = qstate_core::Ensemble::new(vec![(0.3, x.clone()), (0.7, y.clone())]).unwrap();
        let qc = qc_state(&e, "B").unwrap();
        let oracle = 0.3 * von_neumann_entropy(&x) + 0.7 * von_neumann_entropy(&y);
        for form in [CondForm::Difference, CondForm::Extended] {
            assert!((conditional_entropy(&qc, &["A"], &["B"], form).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn mutual_information_examples() {
        let a: Density = random_mixed(&SystemLayout::single("A", 2).unwrap(), 2, 1).unwrap();
        let b: Density = random_mixed(&SystemLayout::single("B", 3).unwrap(), 3, 2).unwrap();
        let ab = qstate_core::tensor(&a, &b).unwrap();
        assert!(mutual_information(&ab, &["A"], &["B"]).unwrap().abs() < 1e-10);
        for d in 2..5 {
            let m = maximally_entangled::<f64>(d).unwrap();
            assert!((mutual_information(&m, &["A"], &["B"]).unwrap() - 2.0 * (d as f64).ln()).abs() < 1e-10);
        }
        let la = SystemLayout::single("A", 2).unwrap();
        let e = qstate_core::Ensemble::new(vec![
            (0.5, Density::basis(0, la.clone()).unwrap()),
            (0.5, Density::basis(1, la).unwrap()),
        ])
        .unwrap();
        let qc = qc_state(&e, "B").unwrap();
        assert!((mutual_information(&qc, &["A"], &["B"]).unwrap() - LN2).abs() < 1e-12);
    }

    #[test]
    fn cmi_examples() {
        let ab: Density = random_mixed(&lay(&[2, 2]), 3, 3).unwrap();
        let c: Density = random_mixed(&SystemLayout::single("C", 2).unwrap(), 2, 4).unwrap();
        let abc = qstate_core::tensor(&ab, &c).unwrap();
        let i = mutual_information(&ab, &["A"], &["B"]).unwrap();
        assert!((conditional_mutual_information(&abc, &["A"], &["B"], &["C"]).unwrap() - i).abs() < 1e-10);
        let a: Density = random_mixed(&SystemLayout::single("A", 2).unwrap(), 2, 5).unwrap();
        let bc: Density = random_mixed(&SystemLayout::new([("B", 2), ("C", 2)]).unwrap(), 4, 6).unwrap();
        let prod = qstate_core::tensor(&a, &bc).unwrap();
        assert!(conditional_mutual_information(&prod, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-10);
        // pure GHZ: S(AC) + S(BC) − S(ABC) − S(C) = ln2 + ln2 − 0 − ln2
        let g = ghz();
        assert!((conditional_mutual_information(&g, &["A"], &["B"], &["C"]).unwrap() - LN2).abs() < 1e-10);
        // dephased GHZ ½(|000><000| + |111><111|): every marginal has entropy ln 2
        let mut d = vec![0.0; 8];
        d[0] = 0.5;
        d[7] = 0.5;
        let cg = Density::from_diagonal(&d, lay(&[2, 2, 2])).unwrap();
        assert!(conditional_mutual_information(&cg, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn multipartite_examples() {
        let parts: Vec<Density> = (0..3)
            .map(|k| {
                let l = SystemLayout::single(&qstate_core::layout::default_label(k), 2).unwrap();
                random_mixed(&l, 2, 10 + k as u64).unwrap()
            })
            .collect();
        let prod = qstate_core::tensor(&qstate_core::tensor(&parts[0], &parts[1]).unwrap(), &parts[2]).unwrap();
        let spec = PartitionSpec::singletons(&["A", "B", "C"], None).unwrap();
        assert!(multipartite_mi(&prod, &spec).unwrap().abs() < 1e-10);
        let g = ghz();
        assert!((multipartite_mi(&g, &spec).unwrap() - 3.0 * LN2).abs() < 1e-10);
        let r: Density = random_mixed(&lay(&[2, 2, 2]), 5, 21).unwrap();
        let spec_c = PartitionSpec::new(
            vec![vec!["A".into()], vec!["B".into()], vec!["C".into()]],
            Some(vec![]),
        )
        .unwrap();
        assert!((multipartite_cmi(&r, &spec_c).unwrap() - multipartite_mi(&r, &spec).unwrap()).abs() < 1e-12);
        assert!(PartitionSpec::singletons(&["A", "A"], None).is_err());
    }

    #[test]
    fn holevo_examples() {
        let l = lay(&[2]);
        let s: Density = random_mixed(&l, 2, 1).unwrap();
        let same = Ensemble::new(vec![(0.4, s.clone()), (0.6, s)]).unwrap();
        assert!(holevo_chi(&same).abs() < 1e-12);
        let z = Density::basis(0, l.clone()).unwrap();
        let o = Density::basis(1, l.clone()).unwrap();
        let e = Ensemble::new(vec![(0.5, z.clone()), (0.5, o)]).unwrap();
        assert!((holevo_chi(&e) - LN2).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Density::from_pure(&CVector::from_vec(vec![Complex::new(h, 0.0), Complex::new(h, 0.0)]), l).unwrap();
        let e = Ensemble::new(vec![(0.5, z), (0.5, plus)]).unwrap();
        let s8 = (std::f64::consts::PI / 8.0).sin().powi(2);
        let oracle = binary_entropy(s8).unwrap();
        assert!((holevo_chi(&e) - oracle).abs() < 1e-12);
        assert!((oracle - 0.4165).abs() < 1e-3);
        assert!((holevo_chi_relative(&e).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn reorder_permutes_factors() {
        let a: Density = random_mixed(&SystemLayout::single("A", 2).unwrap(), 2, 1).unwrap();
        let b: Density = random_mixed(&SystemLayout::single("B", 3).unwrap(), 3, 2).unwrap();
        let ab = qstate_core::tensor(&a, &b).unwrap();
        let ba = qstate_core::tensor(&b, &a).unwrap();
        let r = reorder(&ab, &["B", "A"]).unwrap();
        assert_eq!(r.layout(), ba.layout());
        assert!(qstate_core::hermitian::max_abs(&(r.matrix() - ba.matrix())) < 1e-15);
    }
}
