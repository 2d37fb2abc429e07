use harness_cli::adversarial_search;


#[test]
fn adversarial_targets() {
    let t = std::time::Instant::now();
    for (id, dims, eps, want) in [
        ("entropy-afw", vec![2usize], 0.5, 0.72),
        ("entropy-audenaert", vec![2], 0.5, 0.999),
        ("qce-wilde-qc", vec![3, 3], 0.4, 0.999),
        ("qce-cq-oneside", vec![3, 3], 0.4, 0.999),
        ("qce-afw", vec![2, 2], 0.3, 0.0),
    ] {
        let r = adversarial_search(id, &dims, eps, 4, 1).unwrap();
        let b = r.best.clone().unwrap();
        eprintln!("{id}: ratio {} from {} ({:?})", b.ratio, r.source, t.elapsed());
        assert!(!r.violation);
        assert!(b.ratio >= want, "{id}: {}", b.ratio);
    }
}

#[test]
fn best_pair_replays_at_the_stated_distance() {
    let r = adversarial_search("qce-afw", &[2, 2], 0.3, 2, 1).unwrap();
    let (p, b) = (r.pair.unwrap(), r.best.unwrap());
    let d = qstate_core::trace_distance(&p.rho, &p.sigma).unwrap();
    assert!((d - 0.3).abs() <= 1e-12, "{d}");
    let s = |x| entropic::conditional_entropy(x, &["A"], &["B"], entropic::CondForm::Difference).unwrap();
    assert!(((s(&p.rho) - s(&p.sigma)).abs() - b.lhs).abs() <= 1e-12);
    assert!(b.ratio <= 1.0 && b.ratio > 0.5, "{}", b.ratio);
}

#[test]
fn zero_eps_is_skipped_and_pure_entries_rejected() {
    let r = adversarial_search("entropy-afw", &[3], 0.0, 2, 1).unwrap();
    assert!(r.best.is_none() && r.source.starts_with("skipped"));
    assert!(adversarial_search("eof", &[2, 2], 0.2, 2, 1).is_err());
    assert!(adversarial_search("qce-winter", &[2, 2], 0.2, 2, 1).is_err());
    assert!(adversarial_search("CBt", &[2], 0.2, 2, 1).is_err());
}
