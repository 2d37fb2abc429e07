//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Pass criterion numbers as arguments to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use afw_lab::{
    cq_witness, cup_witness, delta_states, discord_witness, omega_star_check, product_distance,
    random_orthogonal_taus, u_states, upsilon_upper, wilde_witness, winter_energy_witness,
};
use approx_dini::{
    designed_mixture, dominated_convergence_check, entropy_jump_experiment, mixture_convergence_check, DiniQuantity,
    SequenceSpec,
};
use bound_catalog::{
    cb_t_preset, evaluate_bound, vb_mt_bound, BoundInput, CbtPreset, ClassParams, GFunction, Hamiltonian,
};
use energy_gibbs::{certify, f_h, f_n_closed_form, gibbs_point, HamiltonianSpectrum, SpectrumModel, TAIL_TOL};
use entropic::{
    conditional_entropy, conditional_mutual_information, marginal_entropy, mutual_information, von_neumann_entropy,
    CondForm,
};
use harness_cli::sampler::flavored_state;
use harness_cli::verify::replay_pair;
use harness_cli::{
    adversarial_search, default_suite, verify_bound, write_csv, PairFlavor, SampledPair, Strategy,
    VerificationConfig, VerificationReport,
};
use qstate_core::{
    fidelity, random_mixed_with, random_pure_with, rng_from_seed, trace_distance, Density, Mat, SystemLayout,
};
use rand::Rng;
use roof_opt::{classical_correlation, discord, eof_roof, koashi_winter_check, RoofOptions};

// Pinned tolerances.
const OMEGA_STAR_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-10;
const FVDG_SLACK: f64 = 1e-9;
const WITNESS_TOL: f64 = 1e-10;
const BETA_RESIDUAL_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-8;
const GIBBS_OPT_TOL: f64 = 1e-9;
const CBT_LIMIT: f64 = 1e-2;
const IDENTITY_TOL: f64 = 1e-9;
const COINCIDENCE_TOL: f64 = 1e-8;
const KW_GAP: f64 = 2e-3;
const EOF_PURE_TOL: f64 = 1e-10;
const EOF_CLASSICAL_TOL: f64 = 1e-8;
const JUMP_REL: f64 = 0.10;
const MIXTURE_GAP: f64 = 1e-4;
const AFW_QUBIT_RATIO: f64 = 0.72;
const AUDENAERT_QUBIT_RATIO: f64 = 0.999;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn layout(dims: &[usize]) -> SystemLayout {
    SystemLayout::from_dims(dims).unwrap()
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Runs a config and summarizes it; fails on any violation or empty report.
fn certify_cfg(cfg: &VerificationConfig) -> Result<VerificationReport, String> {
    let r = verify_bound(cfg).map_err(|e| format!("{} {:?}: {e}", cfg.bound_id, cfg.dims))?;
    let bad: Vec<String> = r
        .cells
        .iter()
        .filter(|c| c.violations > 0)
        .map(|c| format!("{} {:?} at {}: {} violations, seed {}", c.bound_id, c.dims, c.eps_or_delta, c.violations, c.seed))
        .collect();
    ensure!(bad.is_empty(), "{}", bad.join("; "));
    Ok(r)
}

struct Tally {
    trials: usize,
    flagged_cells: usize,
    max_ratio: f64,
}

impl Tally {
    fn new() -> Self {
        Self { trials: 0, flagged_cells: 0, max_ratio: 0.0 }
    }

    fn add(&mut self, r: &VerificationReport) {
        for c in &r.cells {
            self.trials += c.trials;
            self.flagged_cells += c.flag.is_some() as usize;
            self.max_ratio = self.max_ratio.max(c.max_ratio);
        }
    }

    fn summary(&self) -> String {
        format!("{} trials, 0 violations, max ratio {:.4}, {} cells outside the domain", self.trials, self.max_ratio, self.flagged_cells)
    }
}

fn c1_constructions() -> Outcome {
    let mut rng = rng_from_seed(101);
    let (mut defect, mut trip) = (0.0f64, 0.0f64);
    for d in [2usize, 4, 8, 16, 32] {
        let l = layout(&[d]);
        for k in 0..10_000 {
            let rho: Density = random_mixed_with(&l, 1 + k % d, &mut rng).unwrap();
            let sigma: Density = random_mixed_with(&l, 1 + (k / d) % d, &mut rng).unwrap();
            defect = defect.max(omega_star_check(&rho, &sigma).unwrap());
            let (tp, tm) = random_orthogonal_taus(&l, &mut rng).unwrap();
            let eps = rng.random_range(0.01..=1.0);
            let (r, s) = u_states(&tp, &tm, eps).unwrap();
            let t = delta_states(&r, &s).unwrap();
            let err = (t.epsilon - eps)
                .abs()
                .max(max_abs(&(t.tau_plus.matrix() - tp.matrix())))
                .max(max_abs(&(t.tau_minus.matrix() - tm.matrix())));
            trip = trip.max(err);
        }
    }
    ensure!(defect <= OMEGA_STAR_TOL, "omega* defect {defect:e}");
    ensure!(trip <= ROUND_TRIP_TOL, "round trip error {trip:e}");
    Ok(format!("5 x 10^4 pairs, omega* defect {defect:.1e}, round trip {trip:.1e}"))
}

fn c2_fuchs_van_de_graaf() -> Outcome {
    let mut rng = rng_from_seed(202);
    let mut worst = f64::INFINITY;
    for k in 0..10_000 {
        let d = 2 + k % 15;
        let l = layout(&[d]);
        let rho: Density = random_mixed_with(&l, 1 + k % d, &mut rng).unwrap();
        let sigma: Density = if k % 5 == 0 {
            random_pure_with(&l, &mut rng)
        } else {
            random_mixed_with(&l, 1 + (k / 3) % d, &mut rng).unwrap()
        };
        let f = fidelity(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        worst = worst.min(t - (1.0 - f.sqrt())).min((1.0 - f).max(0.0).sqrt() - t);
    }
    ensure!(worst >= -FVDG_SLACK, "slack {worst:e}");
    Ok(format!("10^4 pairs, min slack {worst:.2e}"))
}

fn c3_entropy() -> Outcome {
    let eps: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let mut tally = Tally::new();
    for id in ["entropy-afw", "entropy-audenaert"] {
        for d in [2usize, 3, 4, 8, 16] {
            // Qubit u-state pairs share their spectrum; mixing reaches the extremes.
            let strategy = if d == 2 { Strategy::Mix } else { Strategy::UstateExact };
            let cfg = VerificationConfig::new(id, &[d], eps.clone(), 10_000, 303).sampler(strategy);
            tally.add(&certify_cfg(&cfg)?);
        }
    }
    let afw = adversarial_search("entropy-afw", &[2], 0.5, 8, 3).map_err(|e| e.to_string())?;
    let aud = adversarial_search("entropy-audenaert", &[2], 0.5, 8, 3).map_err(|e| e.to_string())?;
    let (ra, rb) = (afw.best.unwrap().ratio, aud.best.unwrap().ratio);
    ensure!(!afw.violation && !aud.violation, "adversarial search found a violation");
    ensure!(ra >= AFW_QUBIT_RATIO, "entropy-afw adversarial ratio {ra}");
    ensure!(rb >= AUDENAERT_QUBIT_RATIO, "entropy-audenaert adversarial ratio {rb}");
    Ok(format!("{}; adversarial ratios {ra:.4} / {rb:.6}", tally.summary()))
}

fn c4_wilde() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 2..=8 {
        for eps in grid(0.0, 1.0 - 1.0 / n as f64, 8) {
            for (w, flavor) in [(wilde_witness(n, eps), PairFlavor::Qc), (cq_witness(n, eps), PairFlavor::Classical)] {
                let w = w.map_err(|e| e.to_string())?;
                let cfg = VerificationConfig::new(&w.bound_id, &[n, n], vec![eps], 1, 0).flavor(flavor);
                let distance = trace_distance(&w.rho, &w.sigma).unwrap();
                ensure!((distance - eps).abs() <= 1e-12, "{} n={n}: distance {distance} for eps {eps}", w.bound_id);
                let pair = SampledPair { rho: w.rho.clone(), sigma: w.sigma.clone(), distance: eps };
                let rec = replay_pair(&cfg, &pair).map_err(|e| e.to_string())?;
                ensure!(rec.margin.abs() <= WITNESS_TOL, "{} n={n} eps={eps}: margin {:e}", w.bound_id, rec.margin);
                worst = worst.max(rec.margin.abs());
                count += 1;
            }
        }
    }
    Ok(format!("{count} witness pairs, max |margin| {worst:.1e}"))
}

fn c5_qce() -> Outcome {
    let mut tally = Tally::new();
    let eps = vec![0.05, 0.1, 0.2, 0.4, 0.8];
    for da in [2usize, 3, 4, 8] {
        for flavor in [PairFlavor::General, PairFlavor::Qc, PairFlavor::Cq] {
            let cfg = VerificationConfig::new("qce-afw", &[da, 2], eps.clone(), 10_000, 505).flavor(flavor);
            tally.add(&certify_cfg(&cfg)?);
        }
    }
    Ok(tally.summary())
}

fn c6_gibbs() -> Outcome {
    let mut rng = rng_from_seed(606);
    let mut worst_res = 0.0f64;
    for _ in 0..2000 {
        let e: Vec<f64> = (0..32).map(|_| rng.random_range(0.0..5.0)).collect();
        let spec = HamiltonianSpectrum::explicit(e).unwrap();
        let target = spec.ground_energy() + rng.random_range(0.001..0.999) * (spec.mean() - spec.ground_energy());
        let p = gibbs_point(&spec, target).unwrap();
        let z: f64 = spec.eigenvalues().iter().map(|x| (-p.beta * x).exp()).sum();
        let num: f64 = spec.eigenvalues().iter().map(|x| x * (-p.beta * x).exp()).sum();
        worst_res = worst_res.max((num - target * z).abs() / z);
    }
    ensure!(worst_res <= BETA_RESIDUAL_TOL, "beta residual {worst_res:e}");
    let osc = SpectrumModel::Oscillator { frequencies: vec![1.0] };
    let mut worst_cf = 0.0f64;
    for e in [0.5, 1.0, 3.0, 10.0] {
        let c = certify(&osc, e, TAIL_TOL, TAIL_TOL).map_err(|e| e.to_string())?;
        worst_cf = worst_cf.max((c.point.entropy - f_n_closed_form(e).unwrap()).abs());
    }
    ensure!(worst_cf <= CLOSED_FORM_TOL, "closed form off by {worst_cf:e}");
    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    while checked < 100_000 {
        let n = 2 + checked % 5;
        let mut e: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        e[0] = 0.0;
        let spec = HamiltonianSpectrum::explicit(e).unwrap();
        let l = layout(&[n]);
        let rho: Density = random_mixed_with(&l, 1 + rng.random_range(0..n), &mut rng).unwrap();
        let energy: f64 = (0..n).map(|i| spec.eigenvalues()[i] * rho.matrix()[(i, i)].re).sum();
        if energy <= spec.ground_energy() + 1e-12 {
            continue;
        }
        worst = worst.max(von_neumann_entropy(&rho) - f_h(&spec, energy).unwrap());
        checked += 1;
    }
    ensure!(worst <= GIBBS_OPT_TOL, "S exceeds F_H by {worst:e}");
    Ok(format!("residual {worst_res:.1e}, closed form {worst_cf:.1e}, 10^5 states max S - F_H {worst:.2e}"))
}

fn c7_energy() -> Outcome {
    let mut tally = Tally::new();
    let eps = vec![0.05, 0.2, 0.5];
    let rows: &[(&str, &[usize], PairFlavor)] = &[
        ("qce-winter", &[4, 2], PairFlavor::General),
        ("qce-winter", &[8, 4], PairFlavor::General),
        ("qce-purified", &[4, 2], PairFlavor::General),
        ("qce-purified", &[8, 4], PairFlavor::General),
        ("qcmi-winter", &[4, 2, 2], PairFlavor::General),
        ("qcmi-energy-fid", &[4, 2, 2], PairFlavor::General),
        ("eof-purified", &[4, 2], PairFlavor::Pure),
        ("eof-purified", &[8, 4], PairFlavor::Pure),
        ("sq-ent-energy", &[4, 2], PairFlavor::Pure),
        ("sq-ent-energy", &[8, 2], PairFlavor::Pure),
    ];
    for &(id, dims, flavor) in rows {
        for e in [0.5, 2.0] {
            let cfg = VerificationConfig::new(id, dims, eps.clone(), 1000, 707).flavor(flavor).energy(e);
            tally.add(&certify_cfg(&cfg)?);
        }
    }
    let mut ratios = Vec::new();
    for e in [1.0, 10.0, 100.0] {
        let w = winter_energy_witness(&SpectrumModel::UnitSpaced, e, 0.1, None).map_err(|e| e.to_string())?;
        let input = BoundInput::new().eps(0.1).energy(e, Hamiltonian::Model(SpectrumModel::UnitSpaced));
        let b = evaluate_bound("qce-winter", &input).map_err(|e| e.to_string())?.value;
        ensure!(w.gap <= b, "Winter witness above the bound at E={e}");
        ratios.push(w.ratio(b));
    }
    ensure!(ratios.windows(2).all(|w| w[1] > w[0]), "Winter ratios not increasing: {ratios:?}");
    Ok(format!("{}; Winter ratios {:.4} < {:.4} < {:.4}", tally.summary(), ratios[0], ratios[1], ratios[2]))
}

fn c8_advanced() -> Outcome {
    let osc = GFunction::oscillator(vec![1.0]);
    let c = ClassParams::cd(2.0, 2.0).unwrap();
    let eps: Vec<f64> = (1..=5).map(|k| 10f64.powi(-k)).collect();
    let cb: Vec<f64> = eps.iter().map(|&x| cb_t_preset(&osc, CbtPreset::Oscillator, 10.0, x, c).unwrap().value).collect();
    let vb: Vec<f64> = eps.iter().map(|&x| vb_mt_bound(&osc, 1, 10.0, x, c).unwrap().value).collect();
    for (name, v) in [("CBt", &cb), ("VBmt", &vb)] {
        ensure!(v.windows(2).all(|w| w[1] < w[0]), "{name} not decreasing: {v:?}");
        ensure!(v[4] < CBT_LIMIT, "{name} at 1e-5 is {}", v[4]);
    }
    let mut pairs = 0;
    for e in [0.5, 2.0, 10.0, 100.0] {
        for &x in &[0.1, 0.03, 0.01, 1e-3, 1e-4] {
            let cbt = cb_t_preset(&osc, CbtPreset::Oscillator, e, x, c).unwrap().value;
            let input = BoundInput::new()
                .eps(x)
                .energy(e, Hamiltonian::Model(SpectrumModel::UnitSpaced))
                .class(c);
            let l1 = evaluate_bound("L1ip", &input).map_err(|e| e.to_string())?.value;
            ensure!(cbt <= l1, "CBt {cbt} > L1ip {l1} at E={e} eps={x}");
            pairs += 1;
        }
    }
    Ok(format!("CBt {:.2e}, VBmt {:.2e} at eps=1e-5; CBt <= L1ip on {pairs} points", cb[4], vb[4]))
}

fn c9_structure() -> Outcome {
    let mut rng = rng_from_seed(909);
    let (mut ssa, mut chain) = (f64::INFINITY, 0.0f64);
    for k in 0..10_000 {
        let dims = if k % 2 == 0 { [2usize, 2, 2] } else { [2, 2, 4] };
        let l = layout(&dims);
        let n = l.total_dim();
        let rho: Density = random_mixed_with(&l, 1 + k % n, &mut rng).unwrap();
        let cmi = conditional_mutual_information(&rho, &["A"], &["B"], &["C"]).unwrap();
        ssa = ssa.min(cmi);
        let via_mi = mutual_information(&rho, &["A"], &["B", "C"]).unwrap() - mutual_information(&rho, &["A"], &["C"]).unwrap();
        let via_ce = conditional_entropy(&rho, &["A"], &["C"], CondForm::Difference).unwrap()
            - conditional_entropy(&rho, &["A"], &["B", "C"], CondForm::Difference).unwrap();
        chain = chain.max((cmi - via_mi).abs()).max((cmi - via_ce).abs());
    }
    ensure!(ssa >= -IDENTITY_TOL, "SSA violated: {ssa:e}");
    ensure!(chain <= IDENTITY_TOL, "chain identity off by {chain:e}");
    let mut tally = Tally::new();
    for (id, dims) in [("mqmi", vec![2usize, 2, 2]), ("mqmi", vec![2, 2, 2, 2]), ("mqcmi", vec![2, 2, 2]), ("mqcmi", vec![2, 2, 2, 2])] {
        let cfg = VerificationConfig::new(id, &dims, vec![0.0, 0.05, 0.2, 0.5], 1000, 919);
        tally.add(&certify_cfg(&cfg)?);
    }
    Ok(format!("min I(A:B|C) {ssa:.1e}, chain error {chain:.1e}; {}", tally.summary()))
}

fn c10_discord() -> Outcome {
    let opts = RoofOptions::with_restarts(1, 10);
    let mut rng = rng_from_seed(1010);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let (da, db) = [(2usize, 2usize), (2, 3), (3, 2)][k % 3];
        let rho = flavored_state(&layout(&[da, db]), PairFlavor::Qc, &mut rng).map_err(|e| e.to_string())?;
        let c = classical_correlation(&rho, "B", db * db, &opts).map_err(|e| e.to_string())?.value;
        let i = mutual_information(&rho, &["A"], &["B"]).unwrap();
        worst = worst.max((c - i).abs());
    }
    ensure!(worst <= COINCIDENCE_TOL, "C_B vs I(A:B) off by {worst:e}");
    let mut disc = 0.0f64;
    for d in [2usize, 3, 4] {
        let w = discord_witness(d).map_err(|e| e.to_string())?;
        let cr = classical_correlation(&w.rho, "B", d * d, &opts).map_err(|e| e.to_string())?.value;
        let cs = classical_correlation(&w.sigma, "B", d * d, &opts).map_err(|e| e.to_string())?.value;
        disc = disc.max((cr - cs - (d as f64).ln()).abs());
    }
    ensure!(disc <= COINCIDENCE_TOL, "discord witness gap off by {disc:e}");
    let mut cup = 0.0f64;
    for d in [2usize, 3, 4] {
        let w = cup_witness(d).map_err(|e| e.to_string())?;
        let mut input = BoundInput::new().dims(&[d, d]);
        input.delta_star = Some(product_distance(&w.rho).map_err(|e| e.to_string())?);
        let b = evaluate_bound("c-up", &input).map_err(|e| e.to_string())?.value;
        let c = classical_correlation(&w.rho, "B", d * d, &opts).map_err(|e| e.to_string())?.value;
        cup = cup.max((b - c).abs());
    }
    ensure!(cup <= COINCIDENCE_TOL, "C-UP witness off by {cup:e}");
    let (mut cup_checked, mut worst_up) = (0usize, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let rank = rng.random_range(1..=4);
        let rho: Density = random_mixed_with(&layout(&[2, 2]), rank, &mut rng).unwrap();
        let c = classical_correlation(&rho, "B", 4, &opts).map_err(|e| e.to_string())?.value;
        let dv = discord(&rho, "B", 4, &opts).map_err(|e| e.to_string())?.value;
        let mut input = BoundInput::new().dims(&[2, 2]);
        input.delta_star = Some(product_distance(&rho).map_err(|e| e.to_string())?);
        let b = evaluate_bound("c-up", &input).map_err(|e| e.to_string())?;
        if b.valid {
            ensure!(c <= b.value + 1e-9, "C-UP: {c} > {}", b.value);
            worst_up = worst_up.max(c - b.value);
            cup_checked += 1;
        }
        input.upsilon = Some(upsilon_upper(&rho).map_err(|e| e.to_string())?);
        let b = evaluate_bound("d-up", &input).map_err(|e| e.to_string())?;
        ensure!(dv <= b.value + 1e-9, "D-UP: {dv} > {}", b.value);
        worst_up = worst_up.max(dv - b.value);
    }
    Ok(format!(
        "C_B = I within {worst:.1e}, discord gap {disc:.1e}, C-UP witness {cup:.1e}; C-UP on {cup_checked} and D-UP on 1000 states, max excess {worst_up:.2e}"
    ))
}

fn c11_koashi_winter() -> Outcome {
    let opts = RoofOptions::with_restarts(32, 11);
    let mut rng = rng_from_seed(1111);
    let mut worst = 0.0f64;
    for dc in [2usize, 4] {
        for _ in 0..50 {
            let psi: Density = random_pure_with(&layout(&[2, 2, dc]), &mut rng);
            let kw = koashi_winter_check(&psi, &opts).map_err(|e| e.to_string())?;
            worst = worst.max(kw.gap);
        }
    }
    ensure!(worst <= KW_GAP, "gap {worst:e}");
    Ok(format!("100 pure states, max gap {worst:.1e}"))
}

fn c12_eof() -> Outcome {
    let opts = RoofOptions::default();
    let mut rng = rng_from_seed(1212);
    let mut pure = 0.0f64;
    for k in 0..200 {
        let d = 2 + k % 3;
        let psi: Density = random_pure_with(&layout(&[d, d]), &mut rng);
        let e = eof_roof(&psi, "A", 1, &opts).map_err(|e| e.to_string())?.value;
        pure = pure.max((e - marginal_entropy(&psi, &["A"]).unwrap()).abs());
    }
    ensure!(pure <= EOF_PURE_TOL, "pure inputs off by {pure:e}");
    let mut classical = 0.0f64;
    for k in 0..30 {
        let d = 2 + k % 3;
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = p.iter().sum();
        let mut diag = vec![0.0; d * d];
        for i in 0..d {
            diag[i * d + i] = p[i] / s;
        }
        let rho = Density::from_diagonal(&diag, layout(&[d, d])).unwrap();
        classical = classical.max(eof_roof(&rho, "A", d * d, &RoofOptions::with_restarts(2, k as u64)).map_err(|e| e.to_string())?.value);
    }
    ensure!(classical <= EOF_CLASSICAL_TOL, "classically correlated states give {classical:e}");
    let mut tally = Tally::new();
    for d in [2usize, 3, 4] {
        let cfg = VerificationConfig::new("eof", &[d, d], vec![0.01, 0.03, 0.06, 0.1], 2500, 1213).flavor(PairFlavor::Pure);
        tally.add(&certify_cfg(&cfg)?);
    }
    Ok(format!("pure {pure:.1e}, classical {classical:.1e}; {}", tally.summary()))
}

fn c13_dini() -> Outcome {
    let n_grid: Vec<u32> = (1..=10).map(|k| 2 * k).collect();
    let m_grid: Vec<usize> = (1..=8).collect();
    let mut jumps = Vec::new();
    for c in [0.5, 1.0] {
        let seq = SequenceSpec::new("jump", &[("c", c)], n_grid.clone()).build().map_err(|e| e.to_string())?;
        let rep = entropy_jump_experiment(&seq, &m_grid).map_err(|e| e.to_string())?;
        ensure!((rep.estimated_jump - c).abs() <= JUMP_REL * c, "c={c}: jump {}", rep.estimated_jump);
        jumps.push(rep.estimated_jump);
    }
    let rho = SequenceSpec::new("jump", &[("c", 0.5)], n_grid.clone()).build().map_err(|e| e.to_string())?;
    let tau = SequenceSpec::new("dominating", &[("c", 0.5), ("weight", 0.5)], n_grid).build().map_err(|e| e.to_string())?;
    let dct = dominated_convergence_check(&rho, &tau, 0.5, DiniQuantity::Entropy, &m_grid).map_err(|e| e.to_string())?;
    ensure!(dct.holds, "dominated convergence: {dct:?}");
    let (r, s, p, p0) = designed_mixture(&(1..=30).collect::<Vec<_>>(), 0.4).map_err(|e| e.to_string())?;
    let mix = mixture_convergence_check(&r, &s, &p, p0).map_err(|e| e.to_string())?;
    ensure!(mix.final_gap <= MIXTURE_GAP, "mixture gap {}", mix.final_gap);
    Ok(format!(
        "jumps {:.4} / {:.4}, DCT {:.4} <= {:.4}, mixture gap {:.1e}",
        jumps[0], jumps[1], dct.jump_rho, dct.jump_tau_over_c, mix.final_gap
    ))
}

fn suite_csv(threads: usize) -> Result<(Vec<u8>, usize), String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let reports: Vec<VerificationReport> =
            default_suite(14).iter().map(verify_bound).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let violations = reports.iter().map(|r| r.violations()).sum();
        let mut buf = Vec::new();
        write_csv(&reports, &mut buf).map_err(|e| e.to_string())?;
        Ok((buf, violations))
    })
}

fn c14_determinism() -> Outcome {
    let (a, va) = suite_csv(1)?;
    let (b, vb) = suite_csv(3)?;
    ensure!(a == b, "CSV reports differ between runs");
    ensure!(va == 0 && vb == 0, "default suite has {va} violations");
    Ok(format!("{} bytes identical across runs on 1 and 3 workers, 0 violations", a.len()))
}

fn main() {
    let criteria: Vec<(usize, &str, fn() -> Outcome)> = vec![
        (1, "AFW construction identities", c1_constructions),
        (2, "Fuchs-van de Graaf inequalities", c2_fuchs_van_de_graaf),
        (3, "entropy bound certification", c3_entropy),
        (4, "Wilde and c-q equality witnesses", c4_wilde),
        (5, "conditional entropy bounds", c5_qce),
        (6, "Gibbs correctness", c6_gibbs),
        (7, "energy-constrained bounds", c7_energy),
        (8, "CBt/VBmt faithfulness", c8_advanced),
        (9, "QMI/QCMI structure", c9_structure),
        (10, "discord and classical correlation islands", c10_discord),
        (11, "Koashi-Winter", c11_koashi_winter),
        (12, "entanglement of formation", c12_eof),
        (13, "approximation experiments", c13_dini),
        (14, "determinism", c14_determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
