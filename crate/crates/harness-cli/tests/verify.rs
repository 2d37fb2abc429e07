use afw_lab::{cq_witness, wilde_witness, winter_energy_witness};
use energy_gibbs::SpectrumModel;
use harness_cli::sampler::energy_a;
use harness_cli::verify::replay_pair;
use harness_cli::{
    default_suite, sample_pair, verify_bound, write_csv, PairFlavor, SampledPair, Strategy, VerificationConfig,
};
use proptest::prelude::*;
use qstate_core::trace_distance;

fn csv_of(cfgs: &[VerificationConfig]) -> Vec<u8> {
    let reports: Vec<_> = cfgs.iter().map(|c| verify_bound(c).unwrap()).collect();
    let mut buf = Vec::new();
    write_csv(&reports, &mut buf).unwrap();
    buf
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let cfgs = vec![
        VerificationConfig::new("qce-afw", &[2, 3], vec![0.0, 0.2, 0.6], 40, 11),
        VerificationConfig::new("eof", &[2, 2], vec![0.1], 30, 11).flavor(PairFlavor::Pure),
    ];
    let run = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| csv_of(&cfgs));
    assert_eq!(run(1), run(4));
}

#[test]
fn zero_eps_cells_have_margin_equal_to_rhs() {
    let r = verify_bound(&VerificationConfig::new("qce-afw", &[3, 2], vec![0.0], 25, 2).flavor(PairFlavor::Qc)).unwrap();
    let c = &r.cells[0];
    assert_eq!(c.trials, 25);
    assert_eq!(c.max_lhs, 0.0);
    assert!(c.min_margin >= 0.0 && c.violations == 0);
}

#[test]
fn incompatible_pairings_fail_before_sampling() {
    for cfg in [
        VerificationConfig::new("qce-wilde-qc", &[3, 3], vec![0.2], 10, 0),
        VerificationConfig::new("qce-cq-oneside", &[3, 3], vec![0.2], 10, 0).flavor(PairFlavor::Cq),
        VerificationConfig::new("qce-winter", &[3, 3], vec![0.2], 10, 0),
        VerificationConfig::new("entropy-afw", &[3], vec![0.2], 10, 0).energy(1.0),
        VerificationConfig::new("qcmi", &[2, 2], vec![0.2], 10, 0),
        VerificationConfig::new("CBt", &[2], vec![0.2], 10, 0),
        VerificationConfig::new("eof", &[2, 2], vec![0.2], 10, 0),
    ] {
        assert!(verify_bound(&cfg).is_err(), "{} accepted", cfg.bound_id);
    }
}

#[test]
fn equality_witnesses_replay_with_zero_margin() {
    for n in 2..=6 {
        let edge = 1.0 - 1.0 / n as f64;
        for k in 1..=4 {
            let eps = edge * k as f64 / 4.0;
            for (w, flavor) in [(wilde_witness(n, eps).unwrap(), PairFlavor::Qc), (cq_witness(n, eps).unwrap(), PairFlavor::Classical)] {
                let cfg = VerificationConfig::new(&w.bound_id, &[n, n], vec![eps], 1, 0).flavor(flavor);
                let pair = SampledPair { rho: w.rho.clone(), sigma: w.sigma.clone(), distance: trace_distance(&w.rho, &w.sigma).unwrap() };
                let rec = replay_pair(&cfg, &pair).unwrap();
                assert!(rec.margin.abs() <= 1e-9, "{} n={n} eps={eps}: {}", w.bound_id, rec.margin);
                assert!(!rec.violation);
            }
        }
    }
}

#[test]
fn energy_witness_replays_inside_the_bound() {
    let w = winter_energy_witness(&SpectrumModel::UnitSpaced, 0.5, 0.1, None).unwrap();
    let pair = w.pair.unwrap();
    let dims = pair.rho.layout().dims();
    let cfg = VerificationConfig::new("qce-winter", &dims, vec![0.1], 1, 0).energy(0.5);
    let sp = SampledPair { rho: pair.rho.clone(), sigma: pair.sigma.clone(), distance: trace_distance(&pair.rho, &pair.sigma).unwrap() };
    assert!(energy_a(&sp.rho) <= 0.5 + 1e-9);
    let rec = replay_pair(&cfg, &sp).unwrap();
    assert!(!rec.violation && rec.margin >= 0.0);
    assert!((rec.lhs - w.gap).abs() <= 1e-9, "{} vs {}", rec.lhs, w.gap);
}

#[test]
fn default_suite_passes() {
    let reports: Vec<_> = default_suite(0).iter().map(|c| verify_bound(c).unwrap()).collect();
    for r in &reports {
        assert!(r.pass, "{}: {:?}", r.config.bound_id, r.cells);
    }
    assert!(reports.len() >= 31);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samplers_respect_the_distance(da in 2usize..=4, db in 1usize..=3, eps in 0.01f64..=1.0, seed in any::<u64>(), s in 0usize..3) {
        let strategy = Strategy::ALL[s];
        let p = sample_pair(&[da, db], eps, strategy, PairFlavor::General, seed).unwrap();
        let d = trace_distance(&p.rho, &p.sigma).unwrap();
        prop_assert!((d - p.distance).abs() <= 1e-12);
        match strategy {
            Strategy::UstateExact => prop_assert!((d - eps).abs() <= 1e-10),
            _ => prop_assert!(d <= eps + 1e-10),
        }
    }

    #[test]
    fn ustate_ratio_stays_below_one(d in 2usize..=6, eps in 0.01f64..=1.0, seed in any::<u64>()) {
        let cfg = VerificationConfig::new("entropy-afw", &[d], vec![eps], 1, 0);
        let p = sample_pair(&[d], eps, Strategy::UstateExact, PairFlavor::General, seed).unwrap();
        let rec = replay_pair(&cfg, &p).unwrap();
        prop_assert!(rec.ratio <= 1.0 && !rec.violation);
    }
}
