use crate::gibbs::{certify, TAIL_TOL};
use crate::spectrum::SpectrumModel;
use crate::EnergyError;

/// Tails up to this weight are reported rather than refused.
pub const DIAGNOSTIC_TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub energy: f64,
    pub entropy: f64,
    pub ratio_linear: f64,
    pub ratio_sqrt: f64,
    pub beta: f64,
    pub levels: usize,
    pub tail_mass: f64,
}

/// `F_H(E)/E` and `F_H(E)/sqrt(E)` along a grid, each point with its tail
/// certificate. Purely descriptive: sublinear and sub-square-root growth are
/// read off the trend.
pub fn growth_diagnostics(model: &SpectrumModel, grid: &[f64]) -> Result<Vec<GrowthRow>, EnergyError> {
    grid.iter()
        .map(|&e| {
            let c = certify(model, e, TAIL_TOL, DIAGNOSTIC_TAIL_LIMIT)?;
            let f = c.point.entropy;
            Ok(GrowthRow {
                energy: e,
                entropy: f,
                ratio_linear: f / e,
                ratio_sqrt: f / e.sqrt(),
                beta: c.point.beta,
                levels: c.spectrum.len(),
                tail_mass: c.point.tail_mass,
            })
        })
        .collect()
}
