//! Derivative-free search for pairs that come close to a bound.
//!
//! A pair at trace distance exactly `eps` is
//! `rho = eps tau+ + (1 - eps) omega`, `sigma = eps tau- + (1 - eps) omega`
//! with `tau+-` orthogonal states and `omega` any state; every pair at
//! distance `eps` has this form. The chart parametrizes `tau+-` through a
//! flavored unitary basis split in two and softmax weights, and `omega`
//! through a Gram factor. Known extremal pairs are evaluated as extra seeds.

use qstate_core::{rng_from_seed, Density, Mat, SystemLayout, C64};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use roof_opt::chart::isometry;
use roof_opt::{minimize, SimplexConfig};
use serde::Serialize;

use crate::quantity::{pairing, Quantity};
use crate::sampler::{PairFlavor, SampledPair};
use crate::verify::{replay_pair, trial_seed, TrialRecord, VerificationConfig, DEFAULT_TOLERANCE};
use crate::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Serialize)]
pub struct AdversarialResult {
    pub bound_id: String,
    pub quantity: String,
    pub dims: Vec<usize>,
    pub eps: f64,
    /// `None` for a skipped cell (`eps = 0`, where the ratio is undefined).
    pub best: Option<TrialRecord>,
    /// `seed:<name>` or `restart:<k>`.
    pub source: String,
    pub violation: bool,
    pub evaluations: usize,
    #[serde(skip)]
    pub pair: Option<SampledPair>,
}

struct Chart {
    layout: SystemLayout,
    flavor: PairFlavor,
    n: usize,
    da: usize,
    dr: usize,
    plus: usize,
}

impl Chart {
    fn basis_params(&self) -> usize {
        match self.flavor {
            PairFlavor::Qc => self.dr * 2 * self.da * self.da,
            PairFlavor::Cq => self.da * 2 * self.dr * self.dr,
            PairFlavor::Classical => 0,
            _ => 2 * self.n * self.n,
        }
    }

    fn len(&self) -> usize {
        self.basis_params() + self.n + 2 * self.n * self.n
    }

    fn basis(&self, x: &[f64]) -> Mat {
        let (n, da, dr) = (self.n, self.da, self.dr);
        match self.flavor {
            PairFlavor::Qc => {
                let mut w = Mat::zeros(n, n);
                let step = 2 * da * da;
                for r in 0..dr {
                    let u = isometry(&x[r * step..(r + 1) * step], da, da);
                    for j in 0..da {
                        for a in 0..da {
                            w[(a * dr + r, j * dr + r)] = u[(a, j)];
                        }
                    }
                }
                w
            }
            PairFlavor::Cq => {
                let mut w = Mat::zeros(n, n);
                let step = 2 * dr * dr;
                for a in 0..da {
                    let u = isometry(&x[a * step..(a + 1) * step], dr, dr);
                    w.view_mut((a * dr, a * dr), (dr, dr)).copy_from(&u);
                }
                w
            }
            PairFlavor::Classical => Mat::identity(n, n),
            _ => isometry(x, n, n),
        }
    }

    fn dephase(&self, m: &mut Mat) {
        let dr = self.dr;
        let keep = |i: usize, j: usize| match self.flavor {
            PairFlavor::Qc => i % dr == j % dr,
            PairFlavor::Cq => i / dr == j / dr,
            PairFlavor::Classical => i == j,
            _ => true,
        };
        for i in 0..self.n {
            for j in 0..self.n {
                if !keep(i, j) {
                    m[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
    }

    fn pair(&self, x: &[f64], eps: f64) -> SampledPair {
        let n = self.n;
        let nb = self.basis_params();
        let w = self.basis(&x[..nb]);
        let logits = &x[nb..nb + n];
        let tau = |cols: std::ops::Range<usize>| -> Mat {
            let top = cols.clone().map(|j| logits[j]).fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = cols.clone().map(|j| (logits[j] - top).exp()).sum();
            let mut m = Mat::zeros(n, n);
            for j in cols {
                let v = w.column(j);
                m += (&v * v.adjoint()).scale((logits[j] - top).exp() / z);
            }
            m
        };
        let g = Mat::from_fn(n, n, |r, c| {
            let k = nb + n + 2 * (r * n + c);
            C64::new(x[k], x[k + 1])
        });
        let mut omega = &g * g.adjoint();
        self.dephase(&mut omega);
        let tr: f64 = (0..n).map(|i| omega[(i, i)].re).sum();
        let omega = if tr > 1e-300 { omega.unscale(tr) } else { Mat::identity(n, n).unscale(n as f64) };
        let common = omega.scale(1.0 - eps);
        let rho = tau(0..self.plus).scale(eps) + &common;
        let sigma = tau(self.plus..n).scale(eps) + &common;
        SampledPair {
            rho: Density::from_matrix_unchecked(rho, self.layout.clone()),
            sigma: Density::from_matrix_unchecked(sigma, self.layout.clone()),
            distance: eps,
        }
    }
}

fn diagonal(p: &[f64], layout: &SystemLayout) -> HarnessResult<Density> {
    Ok(Density::from_diagonal(p, layout.clone())?)
}

/// Known (near-)extremal pairs for the entry.
fn seeds(bound_id: &str, dims: &[usize], eps: f64) -> HarnessResult<Vec<(String, SampledPair)>> {
    let layout = SystemLayout::from_dims(dims)?;
    let n = layout.total_dim();
    let mut out = Vec::new();
    match bound_id {
        "entropy-afw" | "entropy-audenaert" => {
            let mut one = vec![0.0; n];
            one[0] = 1.0;
            let mut spread = vec![eps / (n - 1) as f64; n];
            spread[0] = 1.0 - eps;
            let mut two = vec![0.0; n];
            two[0] = 1.0 - eps;
            two[1] = eps;
            for (name, s) in [("diagonal-spread", spread), ("diagonal-two-level", two)] {
                out.push((name.to_string(), SampledPair { rho: diagonal(&one, &layout)?, sigma: diagonal(&s, &layout)?, distance: eps }));
            }
        }
        "qce-wilde-qc" | "qce-cq-oneside" if dims.len() == 2 && dims[0] == dims[1] => {
            let d = dims[0];
            if eps <= 1.0 - 1.0 / d as f64 + 1e-12 {
                let w = if bound_id == "qce-wilde-qc" { afw_lab::wilde_witness(d, eps)? } else { afw_lab::cq_witness(d, eps)? };
                let (rho, sigma) = (w.rho.with_layout(layout.clone())?, w.sigma.with_layout(layout.clone())?);
                out.push((format!("{bound_id}-witness"), SampledPair { rho, sigma, distance: eps }));
            }
        }
        _ => {}
    }
    Ok(out)
}

/// Maximizes `lhs / rhs` at distance `eps` over `restarts` random starts
/// plus the known seeds.
pub fn adversarial_search(bound_id: &str, dims: &[usize], eps: f64, restarts: usize, seed: u64) -> HarnessResult<AdversarialResult> {
    let p = pairing(bound_id).ok_or_else(|| HarnessError::Incompatible(format!("{bound_id} has no computable LHS")))?;
    if p.needs_energy {
        return Err(HarnessError::Incompatible(format!("{bound_id}: the search has no energy constraint")));
    }
    let quantity = p.quantities[0];
    let flavor = p
        .flavors
        .first()
        .or(quantity.flavors().first())
        .copied()
        .unwrap_or(PairFlavor::General);
    if flavor == PairFlavor::Pure {
        return Err(HarnessError::Incompatible(format!("{bound_id}: pure pairs are outside the search chart")));
    }
    if quantity == Quantity::Observable {
        return Err(HarnessError::Incompatible("observable-span is attained in closed form".into()));
    }
    let mut result = AdversarialResult {
        bound_id: p.bound_id.into(),
        quantity: quantity.name().into(),
        dims: dims.to_vec(),
        eps,
        best: None,
        source: String::new(),
        violation: false,
        evaluations: 0,
        pair: None,
    };
    if eps == 0.0 {
        result.source = "skipped: eps = 0".into();
        return Ok(result);
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(HarnessError::Usage(format!("eps = {eps} outside [0, 1]")));
    }
    let cfg = VerificationConfig::new(bound_id, dims, vec![eps], 1, seed).flavor(flavor).quantity(quantity);
    let layout = SystemLayout::from_dims(dims)?;
    let n = layout.total_dim();
    let ld = layout.dims();
    let (da, dr) = (ld[0], ld[1..].iter().product::<usize>());
    // Signed, so one-sided searches can climb out of negative LHS.
    let score = |pair: &SampledPair| -> f64 {
        match replay_pair(&cfg, pair) {
            Ok(r) if r.rhs > 0.0 => r.lhs / r.rhs,
            _ => f64::NEG_INFINITY,
        }
    };
    let mut candidates: Vec<(String, SampledPair, f64)> = Vec::new();
    for (name, pair) in seeds(p.bound_id, dims, eps)? {
        let s = score(&pair);
        candidates.push((format!("seed:{name}"), pair, s));
    }
    let runs: Vec<(usize, SampledPair, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let chart = Chart { layout: layout.clone(), flavor, n, da, dr, plus: 1 + r % (n - 1) };
            let mut rng = rng_from_seed(trial_seed(seed, 0, r));
            let x0: Vec<f64> = (0..chart.len()).map(|_| rng.sample(StandardNormal)).collect();
            let cfg = SimplexConfig { max_evals: (200 * chart.len()).clamp(2000, 20000), ..Default::default() };
            let res = minimize(|x| -score(&chart.pair(x, eps)), &x0, &cfg);
            let pair = chart.pair(&res.x, eps);
            let s = score(&pair);
            (r, pair, s, res.evals)
        })
        .collect();
    for (r, pair, s, evals) in runs {
        result.evaluations += evals;
        candidates.push((format!("restart:{r}"), pair, s));
    }
    let mut best: Option<(String, SampledPair, f64)> = None;
    for c in candidates {
        if best.as_ref().is_none_or(|b| c.2 > b.2) {
            best = Some(c);
        }
    }
    if let Some((source, pair, _)) = best {
        let rec = replay_pair(&cfg, &pair)?;
        result.violation = rec.margin < -DEFAULT_TOLERANCE;
        result.source = source;
        result.best = Some(rec);
        result.pair = Some(pair);
    }
    Ok(result)
}
