//! Energy-constrained near-extremal pairs built on a truncated Gibbs state.
//!
//! Both constructions put the perturbation on a flag level orthogonal to
//! everything `rho` touches, so every entropy is a Shannon entropy of a
//! known spectrum and the trace distance is exactly `eps`. The only gap to
//! the infinite-dimensional value `2 eps F_H(E)` is the truncation, which
//! is reported as `kappa`.

use std::collections::BTreeMap;

use energy_gibbs::{certify, f_h_model, gibbs_point, HamiltonianSpectrum, SpectrumModel};
use entropic::shannon;
use qstate_core::{Density, Mat, SystemLayout, Vector, C64, MAX_DIM};

use crate::witness::{WitnessPair, WitnessQuantity};
use crate::{AfwError, AfwResult};

/// Tail weight a witness truncation must certify.
pub const WITNESS_TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EnergyWitness {
    pub bound_id: String,
    pub energy: f64,
    pub epsilon: f64,
    pub levels: usize,
    pub tail_mass: f64,
    /// Entropy of the truncated Gibbs state.
    pub f_truncated: f64,
    /// `F_H(E)` of the untruncated model.
    pub f_model: f64,
    /// The LHS difference, from the block spectra.
    pub gap: f64,
    /// `2 eps F_H(E) - gap`.
    pub kappa: f64,
    /// Energy of the A marginal of both states.
    pub marginal_energy: f64,
    /// Dense states, when they fit.
    pub pair: Option<WitnessPair>,
}

impl EnergyWitness {
    /// `gap / bound`.
    pub fn ratio(&self, bound: f64) -> f64 {
        self.gap / bound
    }
}

struct Truncated {
    levels: usize,
    probs: Vec<f64>,
    tail: f64,
    mean: f64,
}

fn truncated_gibbs(model: &SpectrumModel, energy: f64, levels: Option<usize>) -> AfwResult<Truncated> {
    let n = match levels {
        Some(n) => n,
        None => shortest_certified(model, energy)?,
    };
    let (spectrum, point, tail) = solve(model, energy, n)?;
    if tail > WITNESS_TAIL_TOL {
        let required = certify(model, energy, WITNESS_TAIL_TOL, WITNESS_TAIL_TOL)
            .map(|c| c.spectrum.len())
            .unwrap_or(usize::MAX);
        return Err(AfwError::Truncation { levels: spectrum.len(), tail_mass: tail, required_levels: required });
    }
    let e = spectrum.eigenvalues();
    let w: Vec<f64> = e.iter().map(|x| (-point.beta * (x - e[0])).exp()).collect();
    let z: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / z).collect();
    let mean = probs.iter().zip(e).map(|(p, x)| p * x).sum();
    Ok(Truncated { levels: spectrum.len(), probs, tail, mean })
}

fn solve(model: &SpectrumModel, energy: f64, n: usize) -> AfwResult<(HamiltonianSpectrum, energy_gibbs::GibbsPoint, f64)> {
    let spectrum = HamiltonianSpectrum::truncated(model, n)?;
    let point = gibbs_point(&spectrum, energy)?;
    let tail = if point.saturated { 1.0 } else { model.tail_mass(&spectrum, point.beta) };
    Ok((spectrum, point, tail))
}

// Bisect below the certified length; keeps small-energy witnesses dense.
fn shortest_certified(model: &SpectrumModel, energy: f64) -> AfwResult<usize> {
    let mut hi = certify(model, energy, WITNESS_TAIL_TOL, WITNESS_TAIL_TOL)?.spectrum.len();
    let mut lo = 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match solve(model, energy, mid) {
            Ok((_, _, tail)) if tail <= WITNESS_TAIL_TOL => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(hi)
}

fn check_eps(eps: f64) -> AfwResult<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AfwError::Domain(format!("eps = {eps} outside (0, 1)")));
    }
    Ok(())
}

fn weighted(w: f64, p: &[f64]) -> impl Iterator<Item = f64> + '_ {
    p.iter().map(move |x| w * x)
}

fn entropy_of(parts: impl Iterator<Item = f64>) -> f64 {
    shannon(&parts.collect::<Vec<_>>())
}

/// `sum_k sqrt(p_k) |k>_A |k>_B` in a space where B has `db >= n` levels.
fn purification(p: &[f64], db: usize) -> Vector {
    let n = p.len();
    let mut v = Vector::zeros(n * db);
    for (k, pk) in p.iter().enumerate() {
        v[k * db + k] = C64::new(pk.sqrt(), 0.0);
    }
    v
}

fn finish(t: &Truncated, model: &SpectrumModel, id: &str, energy: f64, eps: f64, gap: f64, pair: Option<WitnessPair>) -> AfwResult<EnergyWitness> {
    let f_model = f_h_model(model, energy)?;
    Ok(EnergyWitness {
        bound_id: id.into(),
        energy,
        epsilon: eps,
        levels: t.levels,
        tail_mass: t.tail,
        f_truncated: shannon(&t.probs),
        f_model,
        gap,
        kappa: 2.0 * eps * f_model - gap,
        marginal_energy: t.mean,
        pair,
    })
}

fn params(energy: f64, eps: f64, levels: usize) -> BTreeMap<String, f64> {
    [("energy", energy), ("epsilon", eps), ("levels", levels as f64)].iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `rho` purifies the Gibbs state `gamma_A(E)` on AB and
/// `sigma = (1-eps) rho + eps gamma_A(E) (x) |f><f|`, with `|f>` a B level
/// outside the purifying support. `S(A|B)_sigma - S(A|B)_rho = 2 eps S(gamma)`.
pub fn winter_energy_witness(model: &SpectrumModel, energy: f64, eps: f64, levels: Option<usize>) -> AfwResult<EnergyWitness> {
    check_eps(eps)?;
    let t = truncated_gibbs(model, energy, levels)?;
    let p = &t.probs;
    // rho is pure; sigma's blocks are orthogonal
    let s_sigma = entropy_of(std::iter::once(1.0 - eps).chain(weighted(eps, p)));
    let s_sigma_b = entropy_of(weighted(1.0 - eps, p).chain(std::iter::once(eps)));
    let s_rho_b = shannon(p);
    let gap = (s_sigma - s_sigma_b) - (0.0 - s_rho_b);

    let n = t.levels;
    let pair = if n * (n + 1) <= MAX_DIM {
        let layout = SystemLayout::new([("A", n), ("B", n + 1)])?;
        let psi = purification(p, n + 1);
        let rho_m: Mat = &psi * psi.adjoint();
        let mut flag = Mat::zeros(n * (n + 1), n * (n + 1));
        for (k, pk) in p.iter().enumerate() {
            let i = k * (n + 1) + n;
            flag[(i, i)] = C64::new(*pk, 0.0);
        }
        let sigma_m = rho_m.scale(1.0 - eps) + flag.scale(eps);
        Some(WitnessPair {
            rho: Density::from_matrix_unchecked(rho_m, layout.clone()),
            sigma: Density::from_matrix_unchecked(sigma_m, layout),
            claimed_lhs: gap,
            bound_id: "qce-winter".into(),
            claimed_equality: false,
            quantity: WitnessQuantity::ConditionalEntropy,
            params: params(energy, eps, n),
        })
    } else {
        None
    };
    finish(&t, model, "qce-winter", energy, eps, gap, pair)
}

/// `rho = gamma_A(E) (x) |0><0|_B (x) |0><0|_C` and
/// `sigma = (1-eps) rho + eps omega_AB (x) |1><1|_C` with `omega_AB` a
/// purification of `gamma_A(E)`. `I(A:B|C)_sigma = 2 eps S(gamma)`, `I(A:B|C)_rho = 0`.
pub fn cmi_energy_witness(model: &SpectrumModel, energy: f64, eps: f64, levels: Option<usize>) -> AfwResult<EnergyWitness> {
    check_eps(eps)?;
    let t = truncated_gibbs(model, energy, levels)?;
    let p = &t.probs;
    let f = shannon(p);
    let h = entropy_of([1.0 - eps, eps].into_iter());
    // I(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C), each from its block spectrum
    let s_ac = entropy_of(weighted(1.0 - eps, p).chain(weighted(eps, p)));
    let s_bc = entropy_of(std::iter::once(1.0 - eps).chain(weighted(eps, p)));
    let s_abc = entropy_of(weighted(1.0 - eps, p).chain(std::iter::once(eps)));
    let gap = s_ac + s_bc - s_abc - h;
    // rho: S(AC) = S(ABC) = f, S(BC) = S(C) = 0
    let gap = gap - (f + 0.0 - f - 0.0);

    let n = t.levels;
    let pair = if n * n * 2 <= MAX_DIM {
        let layout = SystemLayout::new([("A", n), ("B", n), ("C", 2)])?;
        let dim = 2 * n * n;
        let mut rho_m = Mat::zeros(dim, dim);
        for (k, pk) in p.iter().enumerate() {
            let i = (k * n) * 2;
            rho_m[(i, i)] = C64::new(*pk, 0.0);
        }
        let psi = purification(p, n);
        let mut omega = Mat::zeros(dim, dim);
        for r in 0..n * n {
            for c in 0..n * n {
                omega[(2 * r + 1, 2 * c + 1)] = psi[r] * psi[c].conj();
            }
        }
        let sigma_m = rho_m.scale(1.0 - eps) + omega.scale(eps);
        Some(WitnessPair {
            rho: Density::from_matrix_unchecked(rho_m, layout.clone()),
            sigma: Density::from_matrix_unchecked(sigma_m, layout),
            claimed_lhs: gap,
            bound_id: "qcmi-winter".into(),
            claimed_equality: false,
            quantity: WitnessQuantity::ConditionalMutualInformation,
            params: params(energy, eps, n),
        })
    } else {
        None
    };
    finish(&t, model, "qcmi-winter", energy, eps, gap, pair)
}
