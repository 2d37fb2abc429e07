//! Pair samplers at a controlled trace distance.
//!
//! Flavors describe which sub-family a pair lives in. Labels are those of
//! `SystemLayout::from_dims` (`A`, `B`, ...) and "the rest" means every
//! system after `A`:
//! - `qc`: the rest is classical (block diagonal in its computational basis);
//! - `cq`: `A` is classical;
//! - `classical`: both states diagonal;
//! - `equal-marginal`: `rho_rest = sigma_rest`;
//! - `pure`: both states pure.

use std::fmt;
use std::str::FromStr;

use qstate_core::random::{random_hermitian, random_probabilities, random_unit_vector, random_unitary};
use qstate_core::{
    eigh_matrix, fidelity, kron, partial_trace_matrix, random_mixed_with, random_pure_with, rng_from_seed,
    trace_distance, Density, Mat, StateRng, SystemLayout, Vector, C64,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// `rho, sigma = (1 +- eps)/2 tau+ + (1 -+ eps)/2 tau-` with orthogonal
    /// `tau+-`: distance exactly `eps`.
    #[default]
    UstateExact,
    /// `sigma = (1 - t) rho + t xi`, `t` capped so the distance is `<= eps`.
    Mix,
    /// A local unitary plus a small admixture, scaled down by bisection.
    Perturb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFlavor {
    #[default]
    General,
    Qc,
    Cq,
    Classical,
    EqualMarginal,
    Pure,
}

macro_rules! str_enum {
    ($t:ty { $($v:ident = $s:literal),* }) => {
        impl $t {
            pub fn name(&self) -> &'static str {
                match self { $(Self::$v => $s),* }
            }
            pub const ALL: &'static [$t] = &[$(Self::$v),*];
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $t {
            type Err = HarnessError;
            fn from_str(s: &str) -> HarnessResult<Self> {
                match s { $($s => Ok(Self::$v),)* other => Err(HarnessError::Usage(format!("unknown {} {other:?}", stringify!($t)))) }
            }
        }
    };
}

str_enum!(Strategy { UstateExact = "ustate-exact", Mix = "mix", Perturb = "perturb" });
str_enum!(PairFlavor {
    General = "general",
    Qc = "qc",
    Cq = "cq",
    Classical = "classical",
    EqualMarginal = "equal-marginal",
    Pure = "pure"
});

#[derive(Debug, Clone, PartialEq)]
pub struct PairRequest {
    pub dims: Vec<usize>,
    pub eps: f64,
    pub strategy: Strategy,
    pub flavor: PairFlavor,
    /// `Tr H rho_A <= E` for `H = diag(0, 1, 2, ...)` on `A`.
    pub energy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SampledPair {
    pub rho: Density,
    pub sigma: Density,
    /// The actual trace distance.
    pub distance: f64,
}

impl SampledPair {
    fn new(rho: Density, sigma: Density) -> HarnessResult<Self> {
        let distance = trace_distance(&rho, &sigma)?;
        Ok(Self { rho, sigma, distance })
    }

    /// `sqrt(1 - F)`.
    pub fn fidelity_delta(&self) -> HarnessResult<f64> {
        Ok((1.0 - fidelity(&self.rho, &self.sigma)?).max(0.0).sqrt().min(1.0))
    }
}

pub fn sample_pair(
    dims: &[usize],
    target_eps: f64,
    strategy: Strategy,
    flavor: PairFlavor,
    seed: u64,
) -> HarnessResult<SampledPair> {
    let req = PairRequest { dims: dims.to_vec(), eps: target_eps, strategy, flavor, energy: None };
    sample_pair_with(&req, seed)
}

/// Mean of `diag(0, 1, ...)` on the first system.
pub fn energy_a(rho: &Density) -> f64 {
    let dims = rho.layout().dims();
    let rest: usize = dims[1..].iter().product();
    let m = rho.matrix();
    (0..rho.dim()).map(|i| (i / rest) as f64 * m[(i, i)].re).sum()
}

pub fn check_flavor(dims: &[usize], flavor: PairFlavor) -> HarnessResult<()> {
    let n: usize = dims.iter().product();
    let small = |why: &str| Err(HarnessError::Usage(format!("dims {dims:?} too small for flavor {flavor}: {why}")));
    if dims.is_empty() || dims.contains(&0) || n < 2 {
        return small("need total dimension >= 2");
    }
    match flavor {
        PairFlavor::Qc | PairFlavor::Cq if dims.len() < 2 => small("need at least two systems"),
        PairFlavor::EqualMarginal if dims.len() < 2 || dims[0] < 2 => small("need d_A >= 2 and a second system"),
        _ => Ok(()),
    }
}

pub fn sample_pair_with(req: &PairRequest, seed: u64) -> HarnessResult<SampledPair> {
    check_flavor(&req.dims, req.flavor)?;
    if !(req.eps > 0.0 && req.eps <= 1.0) {
        return Err(HarnessError::Usage(format!("target eps {} outside (0, 1]", req.eps)));
    }
    let layout = SystemLayout::from_dims(&req.dims)?;
    let mut rng = rng_from_seed(seed);
    if req.flavor == PairFlavor::Pure {
        return pure_pair(&layout, req, &mut rng);
    }
    let (rho, sigma) = match req.strategy {
        Strategy::UstateExact => {
            let (tp, tm) = orthogonal_taus(&layout, req.flavor, &mut rng)?;
            afw_lab::u_states(&tp, &tm, req.eps)?
        }
        Strategy::Mix => {
            let rho = flavored_state(&layout, req.flavor, &mut rng)?;
            let xi = partner(&rho, req.flavor, &mut rng)?;
            let d0 = trace_distance(&rho, &xi)?;
            let t = if d0 > req.eps { req.eps / d0 } else { 1.0 };
            let sigma = xi.mix(&rho, t)?;
            (rho, sigma)
        }
        Strategy::Perturb => {
            let rho = flavored_state(&layout, req.flavor, &mut rng)?;
            let xi = partner(&rho, req.flavor, &mut rng)?;
            let h = local_generator(&layout, req.flavor, &mut rng);
            let path = |t: f64| -> HarnessResult<Density> {
                let base = xi.mix(&rho, t)?;
                Ok(conjugate(&base, &unitary_of(&h, t)))
            };
            let t = bisect_distance(&rho, req.eps, &path)?;
            (rho.clone(), path(t)?)
        }
    };
    let (rho, sigma) = match req.energy {
        Some(e) => damp_pair(rho, sigma, e)?,
        None => (rho, sigma),
    };
    SampledPair::new(rho, sigma)
}

/// Largest `t` on a 40-step bisection of `[0, 1]` with `D(rho, path(t)) <= eps`.
fn bisect_distance(rho: &Density, eps: f64, path: &dyn Fn(f64) -> HarnessResult<Density>) -> HarnessResult<f64> {
    if trace_distance(rho, &path(1.0)?)? <= eps {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if trace_distance(rho, &path(mid)?)? <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn rest_dim(layout: &SystemLayout) -> usize {
    layout.dims()[1..].iter().product()
}

/// A unitary whose columns respect the flavor's classical structure.
fn flavored_basis(layout: &SystemLayout, flavor: PairFlavor, rng: &mut StateRng) -> Mat {
    let n = layout.total_dim();
    match flavor {
        PairFlavor::Qc => {
            let (da, dr) = (layout.dims()[0], rest_dim(layout));
            let mut w = Mat::zeros(n, n);
            for r in 0..dr {
                let u: Mat = random_unitary(da, rng);
                for j in 0..da {
                    for a in 0..da {
                        w[(a * dr + r, j * dr + r)] = u[(a, j)];
                    }
                }
            }
            w
        }
        PairFlavor::Cq => {
            let (da, dr) = (layout.dims()[0], rest_dim(layout));
            let mut w = Mat::zeros(n, n);
            for a in 0..da {
                let u: Mat = random_unitary(dr, rng);
                w.view_mut((a * dr, a * dr), (dr, dr)).copy_from(&u);
            }
            w
        }
        PairFlavor::Classical => Mat::identity(n, n),
        _ => random_unitary(n, rng),
    }
}

/// Probabilities with a random number of nonzero entries at random places.
fn sparse_probabilities(n: usize, rng: &mut StateRng) -> Vec<f64> {
    let k = rng.random_range(1..=n);
    let mut p: Vec<f64> = random_probabilities(k, rng);
    p.resize(n, 0.0);
    p.shuffle(rng);
    p
}

fn from_columns(w: &Mat, weights: &[(usize, f64)], layout: &SystemLayout) -> Density {
    let n = w.nrows();
    let mut m = Mat::zeros(n, n);
    for &(j, p) in weights {
        if p > 0.0 {
            let v = w.column(j);
            m += (&v * v.adjoint()).scale(p);
        }
    }
    Density::from_matrix_unchecked(m, layout.clone())
}

pub fn flavored_state(layout: &SystemLayout, flavor: PairFlavor, rng: &mut StateRng) -> HarnessResult<Density> {
    let n = layout.total_dim();
    Ok(match flavor {
        PairFlavor::General | PairFlavor::EqualMarginal => {
            let rank = rng.random_range(1..=n);
            random_mixed_with(layout, rank, rng)?
        }
        PairFlavor::Pure => random_pure_with(layout, rng),
        _ => {
            let w = flavored_basis(layout, flavor, rng);
            let p = sparse_probabilities(n, rng);
            from_columns(&w, &p.into_iter().enumerate().collect::<Vec<_>>(), layout)
        }
    })
}

/// A second state of the same flavor; for `equal-marginal` a rotation of
/// `rho` on `A` alone.
fn partner(rho: &Density, flavor: PairFlavor, rng: &mut StateRng) -> HarnessResult<Density> {
    match flavor {
        PairFlavor::EqualMarginal => {
            let da = rho.layout().dims()[0];
            let v: Mat = random_unitary(da, rng);
            let dr = rest_dim(rho.layout());
            Ok(conjugate(rho, &kron(&v, &Mat::identity(dr, dr))))
        }
        PairFlavor::Pure => Err(HarnessError::Incompatible("pure pairs are built by the pure sampler".into())),
        f => flavored_state(rho.layout(), f, rng),
    }
}

fn orthogonal_taus(layout: &SystemLayout, flavor: PairFlavor, rng: &mut StateRng) -> HarnessResult<(Density, Density)> {
    let n = layout.total_dim();
    if flavor == PairFlavor::General {
        return Ok(afw_lab::random_orthogonal_taus(layout, rng)?);
    }
    if flavor == PairFlavor::EqualMarginal {
        // tau- = (V (x) I) tau+ (V (x) I)^dag with V mapping the A-support
        // of tau+ onto an orthogonal block, so both rest marginals agree.
        let (da, dr) = (layout.dims()[0], rest_dim(layout));
        let k = rng.random_range(1..=da / 2);
        let u: Mat = random_unitary(da, rng);
        let inner = random_mixed_with(&SystemLayout::single("X", k * dr)?, rng.random_range(1..=k * dr), rng)?;
        let embed = |cols: std::ops::Range<usize>| -> Density {
            let p = kron(&u.columns(cols.start, cols.len()).into_owned(), &Mat::identity(dr, dr));
            Density::from_matrix_unchecked(&p * inner.matrix() * p.adjoint(), layout.clone())
        };
        return Ok((embed(0..k), embed(k..2 * k)));
    }
    let w = flavored_basis(layout, flavor, rng);
    let mut side: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    if side.iter().all(|&s| s) || side.iter().all(|&s| !s) {
        let j = rng.random_range(0..n);
        side[j] = !side[j];
    }
    let pick = |want: bool, rng: &mut StateRng| -> Vec<(usize, f64)> {
        let cols: Vec<usize> = (0..n).filter(|&j| side[j] == want).collect();
        let p = sparse_probabilities(cols.len(), rng);
        cols.into_iter().zip(p).collect()
    };
    let plus = pick(true, rng);
    let minus = pick(false, rng);
    Ok((from_columns(&w, &plus, layout), from_columns(&w, &minus, layout)))
}

/// Hermitian generator acting where the flavor allows: everywhere for
/// general and pure pairs, on `A` for `qc` and `equal-marginal`, on the
/// rest for `cq`, nowhere for classical pairs.
fn local_generator(layout: &SystemLayout, flavor: PairFlavor, rng: &mut StateRng) -> Mat {
    let n = layout.total_dim();
    let normalized = |d: usize, rng: &mut StateRng| -> Mat {
        let h: Mat = random_hermitian::<f64, _>(d, rng).into_matrix();
        let r = eigh_matrix(&h).eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        h.unscale(r)
    };
    match flavor {
        PairFlavor::Qc | PairFlavor::EqualMarginal => {
            let (da, dr) = (layout.dims()[0], rest_dim(layout));
            kron(&normalized(da, rng), &Mat::identity(dr, dr))
        }
        PairFlavor::Cq => {
            let (da, dr) = (layout.dims()[0], rest_dim(layout));
            kron(&Mat::identity(da, da), &normalized(dr, rng))
        }
        PairFlavor::Classical => Mat::zeros(n, n),
        _ => normalized(n, rng),
    }
}

fn unitary_of(h: &Mat, t: f64) -> Mat {
    let eig = eigh_matrix(h);
    let v = &eig.eigenvectors;
    let d = Mat::from_diagonal(&Vector::from_iterator(v.ncols(), eig.eigenvalues.iter().map(|&x| C64::from_polar(1.0, t * x))));
    v * d * v.adjoint()
}

fn conjugate(rho: &Density, u: &Mat) -> Density {
    Density::from_matrix_unchecked(u * rho.matrix() * u.adjoint(), rho.layout().clone())
}

/// `t X + (1 - t) |0><0| (x) X_rest` on both states, with `t` chosen so
/// both A-energies are `<= e`. Contractive, so the distance can only drop.
fn damp_pair(rho: Density, sigma: Density, e: f64) -> HarnessResult<(Density, Density)> {
    let worst = energy_a(&rho).max(energy_a(&sigma));
    if worst <= e {
        return Ok((rho, sigma));
    }
    let t = e / worst;
    Ok((damp(&rho, t)?, damp(&sigma, t)?))
}

fn damp(x: &Density, t: f64) -> HarnessResult<Density> {
    let dims = x.layout().dims();
    let da = dims[0];
    let mut keep = vec![false; dims.len()];
    keep[1..].iter_mut().for_each(|k| *k = true);
    let rest = if dims.len() > 1 { partial_trace_matrix(x.matrix(), &dims, &keep) } else { Mat::identity(1, 1) };
    let mut ground = Mat::zeros(da, da);
    ground[(0, 0)] = C64::new(1.0, 0.0);
    let m = x.matrix().scale(t) + kron(&ground, &rest).scale(1.0 - t);
    Ok(Density::from_matrix_unchecked(m, x.layout().clone()))
}

/// Reweights the A-levels of `v` by `exp(-beta a / 2)` so that its energy
/// is at most `target`.
fn cool(v: &Vector, dr: usize, target: f64) -> Vector {
    let energy = |beta: f64| -> (f64, Vector) {
        let w = Vector::from_iterator(v.len(), v.iter().enumerate().map(|(i, z)| z * (-0.5 * beta * (i / dr) as f64).exp()));
        let w = w.normalize();
        let e = w.iter().enumerate().map(|(i, z)| (i / dr) as f64 * z.norm_sqr()).sum();
        (e, w)
    };
    let (e0, w0) = energy(0.0);
    if e0 <= target {
        return w0;
    }
    let mut hi = 1.0;
    while energy(hi).0 > target && hi < 1e6 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if energy(mid).0 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    energy(hi).1
}

fn pure_energy(v: &Vector, dr: usize) -> f64 {
    v.iter().enumerate().map(|(i, z)| (i / dr) as f64 * z.norm_sqr()).sum()
}

/// `phi = sqrt(1 - s^2) psi + s chi` with `chi` orthogonal to `psi`: pure
/// states at distance exactly `s`. Under an energy constraint `s` starts at
/// `eps` and halves until `phi` satisfies it.
fn pure_pair(layout: &SystemLayout, req: &PairRequest, rng: &mut StateRng) -> HarnessResult<SampledPair> {
    let n = layout.total_dim();
    let dr = rest_dim(layout);
    let target = req.energy.map(|e| e * rng.random_range(0.5..1.0));
    let mut psi: Vector = random_unit_vector(n, rng);
    if let Some(t) = target {
        psi = cool(&psi, dr, t);
    }
    let mut chi: Vector = match req.strategy {
        Strategy::Perturb => {
            let h = local_generator(layout, PairFlavor::Pure, rng);
            &unitary_of(&h, 1.0) * &psi
        }
        _ => random_unit_vector(n, rng),
    };
    if let Some(t) = target {
        chi = cool(&chi, dr, t);
    }
    let overlap = psi.dotc(&chi);
    chi -= &psi * overlap;
    let norm = chi.norm();
    if norm < 1e-8 {
        chi = random_unit_vector(n, rng);
        let o = psi.dotc(&chi);
        chi -= &psi * o;
    }
    chi = chi.normalize();
    let phi_at = |s: f64| -> Vector { &psi * C64::new((1.0 - s * s).max(0.0).sqrt(), 0.0) + &chi * C64::new(s, 0.0) };
    let mut s = req.eps;
    if let Some(e) = req.energy {
        let mut k = 0;
        while pure_energy(&phi_at(s), dr) > e && k < 60 {
            s *= 0.5;
            k += 1;
        }
        if k == 60 {
            s = 0.0;
        }
    }
    let rho = Density::from_pure(&psi, layout.clone())?;
    let sigma = Density::from_pure(&phi_at(s), layout.clone())?;
    SampledPair::new(rho, sigma)
}
