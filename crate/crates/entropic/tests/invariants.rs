use entropic::*;
use proptest::prelude::*;
use qstate_core::{random_mixed_with, rng_from_seed, Density, SystemLayout};

fn lay(d: &[usize]) -> SystemLayout {
    SystemLayout::from_dims(d).unwrap()
}

fn state(l: &SystemLayout, seed: u64) -> Density {
    let mut rng = rng_from_seed(seed);
    let rank = 1 + (seed as usize) % l.total_dim();
    random_mixed_with(l, rank, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn entropy_mixing_inequality(d in 2usize..=4, s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0f64..=1.0) {
        let l = lay(&[d]);
        let (r, s) = (state(&l, s1), state(&l, s2));
        let m = r.mix(&s, p).unwrap();
        let gap = von_neumann_entropy(&m) - p * von_neumann_entropy(&r) - (1.0 - p) * von_neumann_entropy(&s);
        prop_assert!(gap >= -1e-9);
        prop_assert!(gap <= binary_entropy(p).unwrap() + 1e-9);
    }

    #[test]
    fn qce_concave_and_almost_convex(s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0f64..=1.0) {
        let l = lay(&[2, 2]);
        let (r, s) = (state(&l, s1), state(&l, s2));
        let m = r.mix(&s, p).unwrap();
        let f = |x: &Density| conditional_entropy(x, &["A"], &["B"], CondForm::Extended).unwrap();
        let gap = f(&m) - p * f(&r) - (1.0 - p) * f(&s);
        prop_assert!(gap >= -1e-9);
        prop_assert!(gap <= binary_entropy(p).unwrap() + 1e-9);
    }

    #[test]
    fn qcmi_almost_affine(s1 in any::<u64>(), s2 in any::<u64>(), p in 0.01f64..0.99) {
        let l = lay(&[2, 2, 2]);
        let (r, s) = (state(&l, s1), state(&l, s2));
        let m = r.mix(&s, p).unwrap();
        let f = |x: &Density| conditional_mutual_information(x, &["A"], &["B"], &["C"]).unwrap();
        let gap = f(&m) - p * f(&r) - (1.0 - p) * f(&s);
        let h = binary_entropy(p).unwrap();
        prop_assert!(gap >= -h - 1e-9 && gap <= h + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn qce_forms_agree_and_are_bounded(da in 1usize..=3, db in 1usize..=3, seed in any::<u64>()) {
        let r = state(&lay(&[da, db]), seed);
        let d = conditional_entropy(&r, &["A"], &["B"], CondForm::Difference).unwrap();
        let e = conditional_entropy(&r, &["A"], &["B"], CondForm::Extended).unwrap();
        let sa = marginal_entropy(&r, &["A"]).unwrap();
        prop_assert!((d - e).abs() <= 1e-8);
        prop_assert!(e <= sa + 1e-9 && e >= -sa - 1e-9);
    }

    #[test]
    fn qmi_is_relative_entropy_to_product(da in 1usize..=3, db in 1usize..=3, seed in any::<u64>()) {
        let r = state(&lay(&[da, db]), seed);
        let i = mutual_information(&r, &["A"], &["B"]).unwrap();
        let prod = qstate_core::tensor(&r.marginal(&["A"]).unwrap(), &r.marginal(&["B"]).unwrap()).unwrap();
        if let RelEntropy::Finite(d) = relative_entropy(&r, &prod).unwrap() {
            prop_assert!((i - d).abs() <= 1e-8);
        }
        let sa = marginal_entropy(&r, &["A"]).unwrap();
        let sb = marginal_entropy(&r, &["B"]).unwrap();
        prop_assert!(i >= -1e-9 && i <= 2.0 * sa.min(sb) + 1e-9);
    }

    #[test]
    fn cmi_monotone_four_party(seed in any::<u64>()) {
        let r = state(&lay(&[2, 2, 2, 2]), seed);
        let c = conditional_mutual_information(&r, &["A"], &["B"], &["C"]).unwrap();
        let i1 = mutual_information(&r, &["A"], &["B", "C"]).unwrap();
        let i2 = mutual_information(&r, &["A", "D"], &["B", "C"]).unwrap();
        prop_assert!(c >= -1e-9);
        prop_assert!(c <= i1 + 1e-9 && i1 <= i2 + 1e-9);
    }

    #[test]
    fn multipartite_cmi_telescopes(seed in any::<u64>()) {
        let r = state(&lay(&[2, 2, 2, 2]), seed);
        let spec = PartitionSpec::singletons(&["A", "B", "C"], Some(&["D"])).unwrap();
        let full = multipartite_cmi(&r, &spec).unwrap();
        let t = conditional_mutual_information(&r, &["A"], &["B"], &["D"]).unwrap()
            + conditional_mutual_information(&r, &["A", "B"], &["C"], &["D"]).unwrap();
        prop_assert!((full - t).abs() <= 1e-9);
        let mi = multipartite_mi(&r, &PartitionSpec::singletons(&["A", "B", "C", "D"], None).unwrap()).unwrap();
        let sum: f64 = ["A", "B", "C", "D"].iter().map(|l| marginal_entropy(&r, &[*l]).unwrap()).sum();
        prop_assert!(mi <= sum + 1e-9);
    }

    #[test]
    fn holevo_nonnegative_and_consistent(n in 1usize..=4, seed in any::<u64>()) {
        let l = lay(&[3]);
        let mut rng = rng_from_seed(seed);
        let p = qstate_core::random::random_probabilities::<f64, _>(n, &mut rng);
        let items = p.iter().enumerate().map(|(k, &pk)| (pk, state(&l, seed.wrapping_add(k as u64)))).collect();
        let e = qstate_core::Ensemble::new(items).unwrap();
        let chi = holevo_chi(&e);
        prop_assert!(chi >= 0.0);
        prop_assert!((chi - holevo_chi_relative(&e).unwrap()).abs() <= 1e-8);
    }
}
