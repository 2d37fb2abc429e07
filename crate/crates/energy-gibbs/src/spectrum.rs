use std::fmt;
use std::path::Path;

use crate::EnergyError;

/// Parametric families of grounded spectra with an extendable cutoff.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumModel {
    /// `E_k = k` for `k = 0, 1, 2, ...`
    UnitSpaced,
    /// `E_k = c k^alpha`
    Power { c: f64, alpha: f64 },
    /// Sum of independent modes, `H = sum_i w_i n_i`.
    Oscillator { frequencies: Vec<f64> },
}

/// Where the eigenvalues of a spectrum came from.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    Explicit,
    /// First `levels` levels of the model (for oscillators: every
    /// occupation pattern of energy at most `(levels-1) * min w`).
    Truncated { model: SpectrumModel, levels: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpectrum {
    eigenvalues: Vec<f64>,
    grounded: bool,
    source: SpectrumSource,
}

/// Hard cap on enumerated levels of a truncated model.
pub const MAX_LEVELS: usize = 1 << 22;

impl HamiltonianSpectrum {
    /// Eigenvalues in any order; they are sorted. Negative or non-finite
    /// entries are rejected.
    pub fn explicit(mut eigenvalues: Vec<f64>) -> Result<Self, EnergyError> {
        if eigenvalues.len() < 2 {
            return Err(EnergyError::Spectrum(format!(
                "need at least 2 eigenvalues, got {}",
                eigenvalues.len()
            )));
        }
        if let Some(bad) = eigenvalues.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(EnergyError::Spectrum(format!("eigenvalue {bad} is not a finite nonnegative real")));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let grounded = eigenvalues[0] == 0.0;
        Ok(Self { eigenvalues, grounded, source: SpectrumSource::Explicit })
    }

    /// One eigenvalue per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, EnergyError> {
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| EnergyError::Spectrum(format!("line {}: cannot parse {line:?}", n + 1)))?;
            values.push(v);
        }
        Self::explicit(values)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, EnergyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| EnergyError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.eigenvalues {
            s.push_str(&format!("{e:?}\n"));
        }
        s
    }

    /// `levels` lowest levels of a model.
    pub fn truncated(model: &SpectrumModel, levels: usize) -> Result<Self, EnergyError> {
        model.validate()?;
        if levels < 2 {
            return Err(EnergyError::Spectrum("truncation needs at least 2 levels".into()));
        }
        if levels > MAX_LEVELS {
            return Err(EnergyError::Spectrum(format!("{levels} levels exceeds cap {MAX_LEVELS}")));
        }
        let eigenvalues = match model {
            SpectrumModel::UnitSpaced => (0..levels).map(|k| k as f64).collect(),
            SpectrumModel::Power { c, alpha } => (0..levels).map(|k| c * (k as f64).powf(*alpha)).collect(),
            SpectrumModel::Oscillator { frequencies } => {
                let cutoff = model.cutoff(levels);
                let mut out = Vec::new();
                enumerate_modes(frequencies, cutoff, 0.0, &mut out)?;
                out.sort_by(f64::total_cmp);
                out
            }
        };
        Ok(Self {
            eigenvalues,
            grounded: true,
            source: SpectrumSource::Truncated { model: model.clone(), levels },
        })
    }

    /// Every level repeated twice: `{c0, c0, c1, c1, ...}`.
    pub fn doubled(&self) -> Self {
        let eigenvalues = self.eigenvalues.iter().flat_map(|&e| [e, e]).collect();
        Self { eigenvalues, grounded: self.grounded, source: SpectrumSource::Explicit }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn grounded(&self) -> bool {
        self.grounded
    }

    pub fn source(&self) -> &SpectrumSource {
        &self.source
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Multiplicity of the lowest level.
    pub fn ground_multiplicity(&self) -> usize {
        let e0 = self.eigenvalues[0];
        self.eigenvalues.iter().take_while(|&&e| e == e0).count()
    }

    /// Mean energy of the maximally mixed state.
    pub fn mean(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.eigenvalues.len() as f64
    }
}

impl SpectrumModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        match self {
            SpectrumModel::UnitSpaced => Ok(()),
            SpectrumModel::Power { c, alpha } => {
                if !(c.is_finite() && *c > 0.0 && alpha.is_finite() && *alpha > 0.0) {
                    return Err(EnergyError::Spectrum(format!("power model needs c>0, alpha>0 (got {c}, {alpha})")));
                }
                Ok(())
            }
            SpectrumModel::Oscillator { frequencies } => {
                if frequencies.is_empty() || frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(EnergyError::Spectrum("oscillator needs positive frequencies".into()));
                }
                Ok(())
            }
        }
    }

    /// Energy cutoff of an oscillator truncation with `levels` levels.
    fn cutoff(&self, levels: usize) -> f64 {
        match self {
            SpectrumModel::Oscillator { frequencies } => {
                let wmin = frequencies.iter().cloned().fold(f64::INFINITY, f64::min);
                (levels - 1) as f64 * wmin
            }
            _ => f64::NAN,
        }
    }

    /// Upper bound on the Gibbs weight (of the untruncated model at inverse
    /// temperature `beta`) carried by the levels that `truncation` dropped.
    pub fn tail_mass(&self, truncation: &HamiltonianSpectrum, beta: f64) -> f64 {
        if beta <= 0.0 {
            return 1.0;
        }
        let n = truncation.len() as f64;
        let raw = match self {
            // exactly the geometric tail probability
            SpectrumModel::UnitSpaced => (-beta * n).exp(),
            SpectrumModel::Power { c, alpha } => {
                let z: f64 = truncation.eigenvalues().iter().map(|e| (-beta * e).exp()).sum();
                let b = beta * c;
                let x = b * n.powf(*alpha);
                let s = 1.0 / alpha;
                let gamma_upper = if s <= 1.0 {
                    x.powf(s - 1.0) * (-x).exp()
                } else if x > s - 1.0 {
                    x.powf(s - 1.0) * (-x).exp() / (1.0 - (s - 1.0) / x)
                } else {
                    f64::INFINITY
                };
                let integral = s * b.powf(-s) * gamma_upper;
                ((-x).exp() + integral) / z
            }
            SpectrumModel::Oscillator { frequencies } => {
                let SpectrumSource::Truncated { levels, .. } = truncation.source() else {
                    return 1.0;
                };
                let cutoff = self.cutoff(*levels);
                let l = frequencies.len() as f64;
                frequencies
                    .iter()
                    .map(|w| {
                        let m = (cutoff / (l * w) + 1e-9).floor();
                        (-beta * w * (m + 1.0)).exp()
                    })
                    .sum()
            }
        };
        raw.min(1.0)
    }

    /// Rough inverse temperature at high energy, used only to predict how
    /// many levels a certificate would need.
    pub(crate) fn beta_estimate(&self, e: f64) -> f64 {
        match self {
            SpectrumModel::UnitSpaced => (1.0 / e).ln_1p(),
            SpectrumModel::Power { alpha, .. } => 1.0 / (alpha * e),
            SpectrumModel::Oscillator { frequencies } => frequencies.len() as f64 / e,
        }
    }

    /// Levels needed for a tail of about `tol` at inverse temperature `beta`.
    pub(crate) fn levels_estimate(&self, beta: f64, tol: f64) -> f64 {
        let need = (1.0 / tol).ln();
        match self {
            SpectrumModel::UnitSpaced => need / beta,
            SpectrumModel::Power { c, alpha } => (need / (beta * c)).powf(1.0 / alpha),
            SpectrumModel::Oscillator { frequencies } => {
                let l = frequencies.len() as f64;
                let wmin = frequencies.iter().cloned().fold(f64::INFINITY, f64::min);
                l * (l / tol).ln() / beta / wmin + 1.0
            }
        }
    }
}

impl fmt::Display for SpectrumModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumModel::UnitSpaced => write!(f, "unit-spaced"),
            SpectrumModel::Power { c, alpha } => write!(f, "power(c={c}, alpha={alpha})"),
            SpectrumModel::Oscillator { frequencies } => write!(f, "oscillator({frequencies:?})"),
        }
    }
}

fn enumerate_modes(freqs: &[f64], cutoff: f64, base: f64, out: &mut Vec<f64>) -> Result<(), EnergyError> {
    let Some((&w, rest)) = freqs.split_first() else {
        out.push(base);
        if out.len() > MAX_LEVELS {
            return Err(EnergyError::Spectrum(format!("oscillator truncation exceeds {MAX_LEVELS} levels")));
        }
        return Ok(());
    };
    let mut e = base;
    while e <= cutoff * (1.0 + 1e-12) + 1e-12 {
        enumerate_modes(rest, cutoff, e, out)?;
        e += w;
    }
    Ok(())
}
