use std::fmt;
use std::sync::Arc;

use energy_gibbs::{f_h, f_h_model, HamiltonianSpectrum, SpectrumModel};
use serde::{Deserialize, Serialize};

use crate::BoundError;

/// `C = c- + c+`, `D = d- + d+` of the class `L_n^m(C, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub m: usize,
    pub n: usize,
}

impl ClassParams {
    pub fn new(c: f64, d: f64, m: usize, n: usize) -> Result<Self, BoundError> {
        if !(c.is_finite() && c >= 0.0 && d.is_finite() && d >= 0.0) {
            return Err(BoundError::Domain(format!("class needs C, D >= 0 (got {c}, {d})")));
        }
        if m == 0 || n == 0 || m > n {
            return Err(BoundError::Domain(format!("class needs 1 <= m <= n (got m={m}, n={n})")));
        }
        Ok(Self { c, d, m, n })
    }

    /// `L_1^1(C, D)`, enough for bounds that only read C and D.
    pub fn cd(c: f64, d: f64) -> Result<Self, BoundError> {
        Self::new(c, d, 1, 1)
    }
}

/// How a delta was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaOrigin {
    /// `delta = sqrt(1 - F)`.
    Fidelity,
    /// `delta^2 >= eps(2 - eps)`.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta {
    pub value: f64,
    pub origin: DeltaOrigin,
}

/// Which subsystem carries the energy constraint (discord-type bounds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constrained {
    #[default]
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flavor {
    pub qc: bool,
    pub cq: bool,
    /// The marginal named by the entry coincides (rho_B = sigma_B for the
    /// discord family, rho_BC = sigma_BC for QCMI).
    pub equal_marginal: bool,
    /// S(rho_A) = S(sigma_A).
    pub equal_entropy: bool,
    pub pure_pair: bool,
}

/// The Hamiltonian behind an energy constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    Spectrum(HamiltonianSpectrum),
    Model(SpectrumModel),
}

impl Hamiltonian {
    pub fn ground_energy(&self) -> f64 {
        match self {
            Hamiltonian::Spectrum(s) => s.ground_energy(),
            Hamiltonian::Model(_) => 0.0,
        }
    }

    /// F_H(E); at the ground energy this is the log of its multiplicity.
    pub fn f_h(&self, energy: f64) -> Result<f64, BoundError> {
        match self {
            Hamiltonian::Spectrum(s) => {
                if energy == s.ground_energy() {
                    Ok((s.ground_multiplicity() as f64).ln())
                } else {
                    Ok(f_h(s, energy)?)
                }
            }
            Hamiltonian::Model(m) => Ok(f_h_model(m, energy)?),
        }
    }
}

/// A majorant `G >= F_H` used by the advanced bounds.
#[derive(Clone)]
pub enum GFunction {
    /// `G_{l,w}` of an l-mode oscillator.
    Oscillator { frequencies: Vec<f64> },
    Custom { name: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl GFunction {
    pub fn oscillator(frequencies: Vec<f64>) -> Self {
        GFunction::Oscillator { frequencies }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GFunction::Oscillator { frequencies } => oscillator_g(frequencies, x),
            GFunction::Custom { f, .. } => f(x),
        }
    }
}

// Same formula as `energy_gibbs::g_osc` but total on x >= 0.
fn oscillator_g(frequencies: &[f64], x: f64) -> f64 {
    let l = frequencies.len() as f64;
    let e0 = 0.5 * frequencies.iter().sum::<f64>();
    let e_star = (frequencies.iter().map(|w| w.ln()).sum::<f64>() / l).exp();
    l * ((x + 2.0 * e0) / (l * e_star)).ln() + l
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GFunction::Oscillator { frequencies } => write!(f, "G_osc({frequencies:?})"),
            GFunction::Custom { name, .. } => write!(f, "G({name})"),
        }
    }
}

/// How `T` and `Delta` of the advanced bound are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CbtPreset {
    /// `Delta = 1/d0 + ln 2`, `T = (1/eps) min{1, sqrt(E / G^-1(ln d0))}`.
    General,
    /// Oscillator G: `Delta = e^-l + ln 2`, `T* = (1/eps) min{1, sqrt(E/E0)}`.
    #[default]
    Oscillator,
}

/// Everything a catalog entry may read. Entries only look at the fields
/// they need and name a missing one in the error.
#[derive(Debug, Clone, Default)]
pub struct BoundInput {
    pub epsilon: Option<f64>,
    pub delta: Option<Delta>,
    pub dims: Vec<usize>,
    pub energy: Option<f64>,
    pub hamiltonian: Option<Hamiltonian>,
    pub class: Option<ClassParams>,
    pub flavor: Flavor,
    pub constrained: Constrained,
    /// Replace every F_H(x) by F_H(x) + ln 2, with the Hamiltonian read as
    /// D{c_k} of a spectrum constraint.
    pub spectrum_constraint: bool,
    pub g_function: Option<GFunction>,
    pub cbt_preset: CbtPreset,
    /// Free parameter of the Winter-type bounds; optimized when absent.
    pub epsilon_prime: Option<f64>,
    pub c_perp: Option<f64>,
    pub span: Option<f64>,
    pub entropy_gap: Option<f64>,
    pub delta_star: Option<f64>,
    pub upsilon: Option<f64>,
}

impl BoundInput {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eps(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn delta(mut self, value: f64, origin: DeltaOrigin) -> Self {
        self.delta = Some(Delta { value, origin });
        self
    }

    pub fn dims(mut self, dims: &[usize]) -> Self {
        self.dims = dims.to_vec();
        self
    }

    pub fn energy(mut self, e: f64, h: Hamiltonian) -> Self {
        self.energy = Some(e);
        self.hamiltonian = Some(h);
        self
    }

    pub fn class(mut self, class: ClassParams) -> Self {
        self.class = Some(class);
        self
    }

    pub fn flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn g(mut self, g: GFunction, preset: CbtPreset) -> Self {
        self.g_function = Some(g);
        self.cbt_preset = preset;
        self
    }

    pub(crate) fn need_eps(&self) -> Result<f64, BoundError> {
        let e = self.epsilon.ok_or(BoundError::Missing("epsilon"))?;
        check_unit("epsilon", e)?;
        Ok(e)
    }

    /// Delta of either origin; a bare epsilon becomes `sqrt(eps(2-eps))`.
    pub(crate) fn need_delta(&self) -> Result<Delta, BoundError> {
        if let Some(d) = self.delta {
            check_unit("delta", d.value)?;
            return Ok(d);
        }
        let e = self.epsilon.ok_or(BoundError::Missing("delta"))?;
        check_unit("epsilon", e)?;
        Ok(Delta { value: (e * (2.0 - e)).sqrt(), origin: DeltaOrigin::Trace })
    }

    pub(crate) fn need_trace_delta(&self) -> Result<f64, BoundError> {
        let d = self.need_delta()?;
        if d.origin != DeltaOrigin::Trace {
            return Err(BoundError::Origin("trace-distance delta (delta^2 >= eps(2-eps))"));
        }
        Ok(d.value)
    }

    pub(crate) fn need_dim(&self, k: usize) -> Result<usize, BoundError> {
        let d = *self.dims.get(k).ok_or(BoundError::Missing("dims"))?;
        if d == 0 {
            return Err(BoundError::Domain("dimensions must be positive".into()));
        }
        Ok(d)
    }

    pub(crate) fn need_energy(&self) -> Result<(f64, &Hamiltonian), BoundError> {
        let h = self.hamiltonian.as_ref().ok_or(BoundError::Missing("spectrum"))?;
        let e = self.energy.ok_or(BoundError::Missing("energy"))?;
        if !(e.is_finite() && e > h.ground_energy()) {
            return Err(BoundError::Domain(format!("energy {e} must exceed the ground energy {}", h.ground_energy())));
        }
        Ok((e, h))
    }

    pub(crate) fn need_class(&self) -> Result<ClassParams, BoundError> {
        self.class.ok_or(BoundError::Missing("class"))
    }

    pub(crate) fn need(&self, v: Option<f64>, name: &'static str) -> Result<f64, BoundError> {
        let x = v.ok_or(BoundError::Missing(name))?;
        if !x.is_finite() {
            return Err(BoundError::Domain(format!("{name} must be finite")));
        }
        Ok(x)
    }
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<(), BoundError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(BoundError::Domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}
