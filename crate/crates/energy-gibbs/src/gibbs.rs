use entropic::binary_entropy;
use qstate_core::{DensityMatrix, SystemLayout, MAX_DIM};

use crate::spectrum::{HamiltonianSpectrum, SpectrumModel, MAX_LEVELS};
use crate::EnergyError;

/// Accepted |<H> - E| after bisection, relative to max(1, E).
pub const BETA_RESIDUAL_TOL: f64 = 1e-10;
/// Default tail certificate for truncated models.
pub const TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsPoint {
    pub energy: f64,
    pub beta: f64,
    /// Maximal entropy F_H(E).
    pub entropy: f64,
    /// Weight of the dropped levels; 0 for explicit spectra.
    pub tail_mass: f64,
    /// E at or above the spectrum mean, so the chaotic state is optimal.
    pub saturated: bool,
    pub residual: f64,
    pub levels: usize,
}

#[derive(Clone, Copy)]
struct Moments {
    z: f64,
    mean: f64,
}

// Sums shifted by the ground energy so large beta does not underflow Z.
fn moments(eigs: &[f64], beta: f64) -> Moments {
    let e0 = eigs[0];
    let (mut z, mut num) = (0.0, 0.0);
    for &e in eigs {
        let w = (-beta * (e - e0)).exp();
        z += w;
        num += w * (e - e0);
    }
    Moments { z, mean: e0 + num / z }
}

pub fn gibbs_point(spec: &HamiltonianSpectrum, energy: f64) -> Result<GibbsPoint, EnergyError> {
    let eigs = spec.eigenvalues();
    let e0 = spec.ground_energy();
    if !energy.is_finite() || energy <= e0 {
        return Err(EnergyError::Domain(format!("energy {energy} must exceed ground energy {e0}")));
    }
    let n = eigs.len();
    let mean = spec.mean();
    if energy >= mean {
        return Ok(GibbsPoint {
            energy,
            beta: 0.0,
            entropy: (n as f64).ln(),
            tail_mass: 0.0,
            saturated: true,
            residual: 0.0,
            levels: n,
        });
    }

    let scale = energy.abs().max(1.0);
    let mut hi = 1.0 / (mean - e0);
    while moments(eigs, hi).mean > energy {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(EnergyError::Domain(format!("no bracket for energy {energy}")));
        }
    }
    let mut lo = 0.0;
    let mut best = (hi, moments(eigs, hi));
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = moments(eigs, mid);
        if (m.mean - energy).abs() < (best.1.mean - energy).abs() {
            best = (mid, m);
        }
        if m.mean > energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if (best.1.mean - energy).abs() <= 1e-14 * scale {
            break;
        }
    }
    let (beta, m) = best;
    let residual = (m.mean - energy).abs();
    if residual > BETA_RESIDUAL_TOL * scale {
        return Err(EnergyError::Domain(format!("bisection stalled at residual {residual:e}")));
    }
    let entropy = (m.z.ln() + beta * (m.mean - e0)).max(0.0);
    Ok(GibbsPoint { energy, beta, entropy, tail_mass: 0.0, saturated: false, residual, levels: n })
}

pub fn gibbs_beta(spec: &HamiltonianSpectrum, energy: f64) -> Result<f64, EnergyError> {
    Ok(gibbs_point(spec, energy)?.beta)
}

/// F_H(E) of an explicit (finite) spectrum.
pub fn f_h(spec: &HamiltonianSpectrum, energy: f64) -> Result<f64, EnergyError> {
    Ok(gibbs_point(spec, energy)?.entropy)
}

/// Populations `e^{-beta E_k}/Z` of the Gibbs state.
pub fn gibbs_probabilities(spec: &HamiltonianSpectrum, energy: f64) -> Result<Vec<f64>, EnergyError> {
    let p = gibbs_point(spec, energy)?;
    let e0 = spec.ground_energy();
    let w: Vec<f64> = spec.eigenvalues().iter().map(|e| (-p.beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// The Gibbs state as a diagonal density matrix on a single system `A`.
pub fn gibbs_state(spec: &HamiltonianSpectrum, energy: f64) -> Result<DensityMatrix<f64>, EnergyError> {
    if spec.len() > MAX_DIM {
        return Err(EnergyError::TooLarge(spec.len()));
    }
    let p = gibbs_probabilities(spec, energy)?;
    let layout = SystemLayout::single("A", p.len()).map_err(|e| EnergyError::Spectrum(e.to_string()))?;
    DensityMatrix::from_diagonal(&p, layout).map_err(|e| EnergyError::Spectrum(e.to_string()))
}

/// `(E+1) h2(1/(E+1))`, the maximal entropy for the unit-spaced spectrum.
pub fn f_n_closed_form(energy: f64) -> Result<f64, EnergyError> {
    if !(energy >= 0.0) || !energy.is_finite() {
        return Err(EnergyError::Domain(format!("F_N needs E >= 0, got {energy}")));
    }
    if energy == 0.0 {
        return Ok(0.0);
    }
    let h = binary_entropy(1.0 / (energy + 1.0)).map_err(|e| EnergyError::Domain(e.to_string()))?;
    Ok((energy + 1.0) * h)
}

/// `l ln((E + 2E0)/(l E*)) + l` for an l-mode oscillator.
pub fn g_osc(l: usize, frequencies: &[f64], energy: f64) -> Result<f64, EnergyError> {
    if l == 0 || frequencies.len() != l {
        return Err(EnergyError::Domain(format!("need {l} >= 1 frequencies, got {}", frequencies.len())));
    }
    if frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(EnergyError::Domain("frequencies must be positive".into()));
    }
    if !(energy.is_finite() && energy > 0.0) {
        return Err(EnergyError::Domain(format!("energy must be positive, got {energy}")));
    }
    let lf = l as f64;
    let e_ground = 0.5 * frequencies.iter().sum::<f64>();
    let e_star = (frequencies.iter().map(|w| w.ln()).sum::<f64>() / lf).exp();
    Ok(lf * ((energy + 2.0 * e_ground) / (lf * e_star)).ln() + lf)
}

/// A truncation of a model whose dropped tail has been bounded.
#[derive(Debug, Clone)]
pub struct CertifiedGibbs {
    pub spectrum: HamiltonianSpectrum,
    pub point: GibbsPoint,
}

/// Solve on growing truncations of `model` until the tail weight is at most
/// `target`. If the level cap is hit first, a tail up to `accept` is still
/// returned; anything worse is refused with an estimate of the levels needed.
pub fn certify(model: &SpectrumModel, energy: f64, target: f64, accept: f64) -> Result<CertifiedGibbs, EnergyError> {
    model.validate()?;
    if !(energy.is_finite() && energy > 0.0) {
        return Err(EnergyError::Domain(format!("energy {energy} must exceed ground energy 0")));
    }
    let mut levels = 64usize;
    let mut last: Option<CertifiedGibbs> = None;
    loop {
        let spectrum = match HamiltonianSpectrum::truncated(model, levels) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut point = gibbs_point(&spectrum, energy)?;
        let tail = model.tail_mass(&spectrum, point.beta);
        point.tail_mass = tail;
        let beta = if point.saturated { model.beta_estimate(energy) } else { point.beta };
        let done = tail <= target;
        last = Some(CertifiedGibbs { spectrum, point });
        if done || levels >= MAX_LEVELS {
            break;
        }
        let want = model.levels_estimate(beta, target).ceil();
        let next = if want.is_finite() && want > (2 * levels) as f64 {
            (want * 1.1).min(MAX_LEVELS as f64) as usize
        } else {
            2 * levels
        };
        levels = next.min(MAX_LEVELS);
    }
    match last {
        Some(c) if c.point.tail_mass <= target.max(accept) => Ok(c),
        other => {
            let tail = other.as_ref().map_or(1.0, |c| c.point.tail_mass);
            let beta = match &other {
                Some(c) if !c.point.saturated => c.point.beta,
                _ => model.beta_estimate(energy),
            };
            Err(EnergyError::Truncation {
                energy,
                tail_mass: tail,
                required_levels: model.levels_estimate(beta, target),
            })
        }
    }
}

/// F_H(E) of an infinite model from a truncation certified to `TAIL_TOL`.
pub fn f_h_truncated(model: &SpectrumModel, energy: f64) -> Result<f64, EnergyError> {
    Ok(certify(model, energy, TAIL_TOL, TAIL_TOL)?.point.entropy)
}

/// F_H(E) of an infinite model: exact for oscillators (unit spacing
/// included), certified truncation otherwise. `F_H(0) = 0` for these
/// grounded nondegenerate models.
pub fn f_h_model(model: &SpectrumModel, energy: f64) -> Result<f64, EnergyError> {
    if energy == 0.0 {
        return Ok(0.0);
    }
    match model {
        SpectrumModel::UnitSpaced => f_n_closed_form(energy),
        SpectrumModel::Oscillator { frequencies } => {
            model.validate()?;
            oscillator_f_h(frequencies, energy)
        }
        SpectrumModel::Power { .. } => f_h_truncated(model, energy),
    }
}

/// Exact F_H of independent modes `sum_i w_i n_i`: at the common inverse
/// temperature each mode holds `n_i = 1/(e^{beta w_i} - 1)` quanta and
/// contributes `g(n_i)` (which equals `F_N(n_i)`).
pub fn oscillator_f_h(frequencies: &[f64], energy: f64) -> Result<f64, EnergyError> {
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(EnergyError::Domain(format!("energy must be nonnegative, got {energy}")));
    }
    if energy == 0.0 {
        return Ok(0.0);
    }
    if let [w] = frequencies {
        return f_n_closed_form(energy / w);
    }
    let occupation = |beta: f64| -> Vec<f64> { frequencies.iter().map(|w| 1.0 / (beta * w).exp_m1()).collect() };
    let mean = |beta: f64| -> f64 { occupation(beta).iter().zip(frequencies).map(|(n, w)| n * w).sum() };
    // bisection in ln(beta); mean energy decreases from infinity to 0
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    while mean(lo.exp()) < energy {
        lo -= 1.0;
    }
    while mean(hi.exp()) > energy {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean(mid.exp()) > energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = (0.5 * (lo + hi)).exp();
    occupation(beta)
        .into_iter()
        .map(|n| entropic::g_fn(n).map_err(|e| EnergyError::Domain(e.to_string())))
        .sum()
}
