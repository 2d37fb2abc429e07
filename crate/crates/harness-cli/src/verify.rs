//! Randomized certification: per-cell trials with replayable seeds, reduced
//! in trial order so reports do not depend on the worker count.

use std::io::Write;

use bound_catalog::{evaluate_bound, BoundInput, BoundValue, DeltaOrigin, Flavor, Hamiltonian};
use energy_gibbs::SpectrumModel;
use qstate_core::random::random_hermitian;
use qstate_core::{eigvalsh, rng_from_seed, Mat, SystemLayout};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::quantity::{pairing, register_entropy_gap, Pairing, Quantity};
use crate::sampler::{check_flavor, flavored_state, sample_pair_with, PairFlavor, PairRequest, SampledPair, Strategy};
use crate::{HarnessError, HarnessResult};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub const CSV_HEADER: [&str; 10] =
    ["bound_id", "quantity", "dims", "eps_or_delta", "trials", "violations", "max_lhs", "min_margin", "max_ratio", "seed"];

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_trials() -> usize {
    100
}

/// A grid over `eps` (trace distance) or `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Eps,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationConfig {
    pub bound_id: String,
    /// Defaults to the entry's first computable quantity.
    #[serde(default)]
    pub quantity_id: Option<String>,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub sampler: Strategy,
    #[serde(default)]
    pub flavor: PairFlavor,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Energy bound for `H = diag(0, 1, ...)` on `A`, read by the catalog as
    /// the unit-spaced oscillator.
    #[serde(default)]
    pub energy: Option<f64>,
    /// Test mode: multiplies every RHS, to check that violations surface.
    #[serde(default)]
    pub rhs_scale: Option<f64>,
}

impl VerificationConfig {
    pub fn new(bound_id: &str, dims: &[usize], eps_grid: Vec<f64>, trials: usize, master_seed: u64) -> Self {
        Self {
            bound_id: bound_id.into(),
            quantity_id: None,
            dims: dims.to_vec(),
            eps_grid: Some(eps_grid),
            delta_grid: None,
            trials,
            sampler: Strategy::UstateExact,
            flavor: PairFlavor::General,
            master_seed,
            tolerance: DEFAULT_TOLERANCE,
            energy: None,
            rhs_scale: None,
        }
    }

    pub fn quantity(mut self, q: Quantity) -> Self {
        self.quantity_id = Some(q.name().into());
        self
    }

    pub fn flavor(mut self, f: PairFlavor) -> Self {
        self.flavor = f;
        self
    }

    pub fn sampler(mut self, s: Strategy) -> Self {
        self.sampler = s;
        self
    }

    pub fn energy(mut self, e: f64) -> Self {
        self.energy = Some(e);
        self
    }

    pub fn delta_grid(mut self, grid: Vec<f64>) -> Self {
        self.eps_grid = None;
        self.delta_grid = Some(grid);
        self
    }

    fn grid(&self) -> HarnessResult<(Grid, &[f64])> {
        match (&self.eps_grid, &self.delta_grid) {
            (Some(g), None) => Ok((Grid::Eps, g)),
            (None, Some(g)) => Ok((Grid::Delta, g)),
            _ => Err(HarnessError::Usage("give exactly one of eps_grid and delta_grid".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub dims: Vec<usize>,
    /// Grid value of the cell.
    pub eps_or_delta: f64,
    /// The distance the bound was evaluated at.
    pub distance: f64,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub ratio: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub bound_id: String,
    pub quantity: String,
    pub exact: bool,
    pub dims: Vec<usize>,
    pub eps_or_delta: f64,
    pub trials: usize,
    /// Trials outside the bound's validity domain.
    pub skipped: usize,
    pub violations: usize,
    pub max_lhs: f64,
    pub min_margin: f64,
    pub max_ratio: f64,
    /// Seed of the trial with the smallest margin.
    pub seed: u64,
    /// SHA-256 of the pair with the largest ratio.
    pub argmax_digest: String,
    /// Set when the cell itself lies outside the validity domain.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub config: VerificationConfig,
    pub cells: Vec<CellReport>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn violations(&self) -> usize {
        self.cells.iter().map(|c| c.violations).sum()
    }
}

/// `sha256(master || cell || trial)`, first eight bytes little endian.
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((cell as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

fn pair_digest(p: &SampledPair) -> String {
    let mut h = Sha256::new();
    for m in [p.rho.matrix(), p.sigma.matrix()] {
        for z in m.iter() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything fixed before sampling.
struct Plan {
    pairing: Pairing,
    quantity: Quantity,
    grid: Grid,
}

fn plan(cfg: &VerificationConfig) -> HarnessResult<Plan> {
    let pairing = pairing(&cfg.bound_id)
        .ok_or_else(|| HarnessError::Incompatible(format!("{} has no computable LHS", cfg.bound_id)))?;
    let quantity = match &cfg.quantity_id {
        Some(q) => q.parse()?,
        None => pairing.quantities[0],
    };
    if !pairing.quantities.contains(&quantity) {
        return Err(HarnessError::Incompatible(format!("{} cannot be certified with {quantity}", cfg.bound_id)));
    }
    let ok = |allowed: &[PairFlavor]| allowed.is_empty() || allowed.contains(&cfg.flavor);
    if !ok(pairing.flavors) || !ok(quantity.flavors()) {
        return Err(HarnessError::Incompatible(format!("{} with {quantity} needs other pairs than {}", cfg.bound_id, cfg.flavor)));
    }
    if cfg.dims.len() < quantity.min_systems() {
        return Err(HarnessError::Incompatible(format!("{quantity} needs {} systems", quantity.min_systems())));
    }
    if !quantity.is_exact() && cfg.dims.len() != 2 {
        return Err(HarnessError::Incompatible("estimates need two systems".into()));
    }
    match (pairing.needs_energy, cfg.energy) {
        (true, None) => return Err(HarnessError::Incompatible(format!("{} needs an energy", cfg.bound_id))),
        (false, Some(_)) => return Err(HarnessError::Incompatible(format!("{} takes no energy", cfg.bound_id))),
        (_, Some(e)) if !(e > 0.0 && e.is_finite()) => return Err(HarnessError::Usage(format!("energy {e} must be positive"))),
        _ => {}
    }
    if cfg.trials == 0 {
        return Err(HarnessError::Usage("trials must be >= 1".into()));
    }
    if !(cfg.tolerance >= 0.0) {
        return Err(HarnessError::Usage("tolerance must be >= 0".into()));
    }
    check_flavor(&cfg.dims, cfg.flavor)?;
    let (grid, values) = cfg.grid()?;
    if values.is_empty() || values.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(HarnessError::Usage("grid values must lie in [0, 1]".into()));
    }
    Ok(Plan { pairing, quantity, grid })
}

fn bound_flavor(f: PairFlavor) -> Flavor {
    Flavor {
        qc: matches!(f, PairFlavor::Qc | PairFlavor::Classical),
        cq: matches!(f, PairFlavor::Cq | PairFlavor::Classical),
        equal_marginal: f == PairFlavor::EqualMarginal,
        equal_entropy: false,
        pure_pair: f == PairFlavor::Pure,
    }
}

fn observable(cfg: &VerificationConfig, cell: usize) -> (Mat, f64) {
    let n: usize = cfg.dims.iter().product();
    let mut rng = rng_from_seed(trial_seed(cfg.master_seed, cell, usize::MAX));
    let m: Mat = random_hermitian::<f64, _>(n, &mut rng).into_matrix();
    let e = eigvalsh(&m);
    (m, e[0] - e[e.len() - 1])
}

struct Ctx<'a> {
    cfg: &'a VerificationConfig,
    plan: &'a Plan,
    obs: Option<(Mat, f64)>,
}

impl Ctx<'_> {
    fn input(&self, distance: f64, pair: Option<&SampledPair>) -> HarnessResult<BoundInput> {
        let (cfg, plan) = (self.cfg, self.plan);
        let mut input = BoundInput::new().dims(&plan.quantity.bound_dims(&cfg.dims)).flavor(bound_flavor(cfg.flavor));
        input = match (plan.grid, plan.pairing.origin) {
            (Grid::Delta, origin) => input.delta(distance, origin),
            (Grid::Eps, DeltaOrigin::Fidelity) => match pair {
                Some(p) => input.eps(distance).delta(p.fidelity_delta()?, DeltaOrigin::Fidelity),
                _ => input.eps(distance),
            },
            (Grid::Eps, DeltaOrigin::Trace) => input.eps(distance),
        };
        if let Some(e) = cfg.energy {
            input = input.energy(e, Hamiltonian::Model(SpectrumModel::UnitSpaced));
        }
        if let Some((_, span)) = &self.obs {
            input.span = Some(*span);
        }
        if plan.quantity == Quantity::Holevo {
            input.entropy_gap = Some(match pair {
                Some(p) => register_entropy_gap(&p.rho, &p.sigma)?,
                None => 0.0,
            });
        }
        Ok(input)
    }

    fn bound(&self, distance: f64, pair: Option<&SampledPair>) -> HarnessResult<BoundValue> {
        let mut v = evaluate_bound(&self.cfg.bound_id, &self.input(distance, pair)?)?;
        v.value *= self.cfg.rhs_scale.unwrap_or(1.0);
        Ok(v)
    }

    /// Target trace distance for a grid value.
    fn target(&self, x: f64) -> f64 {
        match (self.plan.grid, self.plan.pairing.origin) {
            // delta^2 = eps(2 - eps)
            (Grid::Delta, DeltaOrigin::Trace) => 1.0 - (1.0 - x * x).max(0.0).sqrt(),
            _ => x,
        }
    }

    /// The distance parameter the bound is evaluated at.
    fn measured(&self, p: &SampledPair) -> HarnessResult<f64> {
        Ok(match (self.plan.grid, self.plan.pairing.origin) {
            (Grid::Delta, DeltaOrigin::Fidelity) => p.fidelity_delta()?,
            (Grid::Delta, DeltaOrigin::Trace) => (p.distance * (2.0 - p.distance)).max(0.0).sqrt().min(1.0),
            (Grid::Eps, _) => p.distance.min(1.0),
        })
    }

    fn trial(&self, cell: usize, x: f64, seed: u64) -> HarnessResult<Option<(TrialRecord, SampledPair)>> {
        let cfg = self.cfg;
        let pair = if x == 0.0 {
            let layout = SystemLayout::from_dims(&cfg.dims)?;
            let mut rng = rng_from_seed(seed);
            let rho = flavored_state(&layout, cfg.flavor, &mut rng)?;
            let rho = match cfg.energy {
                Some(e) => {
                    let req = PairRequest { dims: cfg.dims.clone(), eps: 1.0, strategy: Strategy::Mix, flavor: cfg.flavor, energy: Some(e) };
                    let p = sample_pair_with(&req, seed)?;
                    if cfg.flavor == PairFlavor::Pure { p.rho } else { p.sigma }
                }
                None => rho,
            };
            SampledPair { sigma: rho.clone(), rho, distance: 0.0 }
        } else {
            let req = PairRequest {
                dims: cfg.dims.clone(),
                eps: self.target(x),
                strategy: cfg.sampler,
                flavor: cfg.flavor,
                energy: cfg.energy,
            };
            sample_pair_with(&req, seed)?
        };
        let distance = self.measured(&pair)?;
        let b = self.bound(distance, Some(&pair))?;
        if !b.valid {
            return Ok(None);
        }
        let m = self.obs.as_ref().map(|o| &o.0);
        let lhs = self.plan.quantity.lhs(&pair.rho, &pair.sigma, m)?;
        let rhs = b.value;
        let margin = rhs - lhs;
        let ratio = if lhs <= 0.0 { 0.0 } else if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
        let violation = self.plan.quantity.is_exact() && margin < -cfg.tolerance;
        let rec = TrialRecord { cell, dims: cfg.dims.clone(), eps_or_delta: x, distance, seed, lhs, rhs, margin, ratio, violation };
        Ok(Some((rec, pair)))
    }
}

pub fn verify_bound(cfg: &VerificationConfig) -> HarnessResult<VerificationReport> {
    let plan = plan(cfg)?;
    let (_, grid) = cfg.grid()?;
    let mut cells = Vec::with_capacity(grid.len());
    for (ci, &x) in grid.iter().enumerate() {
        let obs = (plan.quantity == Quantity::Observable).then(|| observable(cfg, ci));
        let ctx = Ctx { cfg, plan: &plan, obs };
        let mut cell = CellReport {
            bound_id: cfg.bound_id.clone(),
            quantity: plan.quantity.name().into(),
            exact: plan.quantity.is_exact(),
            dims: cfg.dims.clone(),
            eps_or_delta: x,
            trials: 0,
            skipped: 0,
            violations: 0,
            max_lhs: f64::NEG_INFINITY,
            min_margin: f64::INFINITY,
            max_ratio: 0.0,
            seed: 0,
            argmax_digest: String::new(),
            flag: None,
        };
        let at_grid = ctx.bound(x, None)?;
        if !at_grid.valid {
            cell.flag = Some(at_grid.validity_reason);
            cell.skipped = cfg.trials;
            cells.push(cell);
            continue;
        }
        let outcomes: Vec<HarnessResult<Option<(TrialRecord, SampledPair)>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|ti| ctx.trial(ci, x, trial_seed(cfg.master_seed, ci, ti)))
            .collect();
        let mut best_ratio: Option<(f64, String)> = None;
        for o in outcomes {
            let Some((rec, pair)) = o? else {
                cell.skipped += 1;
                continue;
            };
            cell.trials += 1;
            cell.violations += rec.violation as usize;
            cell.max_lhs = cell.max_lhs.max(rec.lhs);
            if rec.margin < cell.min_margin {
                cell.min_margin = rec.margin;
                cell.seed = rec.seed;
            }
            if best_ratio.as_ref().is_none_or(|(r, _)| rec.ratio > *r) {
                best_ratio = Some((rec.ratio, pair_digest(&pair)));
            }
        }
        if let Some((r, d)) = best_ratio {
            cell.max_ratio = r;
            cell.argmax_digest = d;
        }
        cells.push(cell);
    }
    let pass = cells.iter().all(|c| c.violations == 0);
    Ok(VerificationReport { config: cfg.clone(), cells, pass })
}

/// Replays one fixed pair through the same bound evaluation as a trial.
pub fn replay_pair(cfg: &VerificationConfig, pair: &SampledPair) -> HarnessResult<TrialRecord> {
    let plan = plan(cfg)?;
    let obs = (plan.quantity == Quantity::Observable).then(|| observable(cfg, 0));
    let ctx = Ctx { cfg, plan: &plan, obs };
    let distance = ctx.measured(pair)?;
    let b = ctx.bound(distance, Some(pair))?;
    let lhs = plan.quantity.lhs(&pair.rho, &pair.sigma, ctx.obs.as_ref().map(|o| &o.0))?;
    let margin = b.value - lhs;
    Ok(TrialRecord {
        cell: 0,
        dims: cfg.dims.clone(),
        eps_or_delta: distance,
        distance,
        seed: 0,
        lhs,
        rhs: b.value,
        margin,
        ratio: if lhs <= 0.0 { 0.0 } else { lhs / b.value },
        violation: plan.quantity.is_exact() && (margin < -cfg.tolerance || !b.valid),
    })
}

pub fn verify_many(cfgs: &[VerificationConfig]) -> HarnessResult<Vec<VerificationReport>> {
    cfgs.iter().map(verify_bound).collect()
}

fn num(x: f64, has: bool) -> String {
    if has {
        format!("{x:?}")
    } else {
        String::new()
    }
}

/// Fixed columns, one row per cell; estimate-based rows carry a
/// `:estimate` suffix on the quantity.
pub fn write_csv<W: Write>(reports: &[VerificationReport], out: W) -> HarnessResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        for c in &r.cells {
            let has = c.trials > 0;
            let quantity = if c.exact { c.quantity.clone() } else { format!("{}:estimate", c.quantity) };
            let dims = c.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
            w.write_record([
                c.bound_id.clone(),
                quantity,
                dims,
                format!("{:?}", c.eps_or_delta),
                c.trials.to_string(),
                c.violations.to_string(),
                num(c.max_lhs, has),
                num(c.min_margin, has),
                num(c.max_ratio, has),
                c.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
