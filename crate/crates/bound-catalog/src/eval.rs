use energy_gibbs::SpectrumModel;

use crate::input::{BoundInput, ClassParams, Constrained, DeltaOrigin, GFunction, Hamiltonian};
use crate::optimize::{
    cb_t_preset, energy_function, g, h2, optimize_winter_parameter, vb_mt_bound, WINTER_EOF, WINTER_EOF_REG,
    WINTER_QCE, WINTER_QCMI,
};
use crate::{entry, BoundError, BoundValue};

type Res = Result<BoundValue, BoundError>;

/// Rounding slack on domain edges such as `eps <= 1 - 1/d`.
const DOMAIN_SLACK: f64 = 1e-12;

fn ln(d: usize) -> f64 {
    (d as f64).ln()
}

fn ln_minus_one(d: usize) -> Result<f64, BoundError> {
    if d < 2 {
        return Err(BoundError::Domain(format!("dimension {d} < 2 leaves ln(d-1) undefined")));
    }
    Ok(((d - 1) as f64).ln())
}

fn within(v: BoundValue, ok: bool, reason: impl FnOnce() -> String) -> BoundValue {
    if ok {
        v
    } else {
        v.flagged(reason())
    }
}

fn sum_ln(dims: &[usize]) -> f64 {
    dims.iter().map(|&d| ln(d)).sum()
}

fn min_ab(input: &BoundInput) -> Result<usize, BoundError> {
    Ok(input.need_dim(0)?.min(input.need_dim(1)?))
}

fn parties(input: &BoundInput) -> Result<usize, BoundError> {
    if input.dims.len() < 2 {
        return Err(BoundError::Missing("dims"));
    }
    Ok(input.dims.len())
}

/// Energy-constrained subsystems for the m-type bounds: `class.m` when
/// given, otherwise all n.
fn constrained_count(input: &BoundInput, n: usize) -> usize {
    input.class.map_or(n, |c| c.m)
}

/// The G majorant: explicit, or derived from an oscillator Hamiltonian.
fn g_for(input: &BoundInput) -> Result<GFunction, BoundError> {
    if let Some(gf) = &input.g_function {
        return Ok(gf.clone());
    }
    match &input.hamiltonian {
        Some(Hamiltonian::Model(SpectrumModel::UnitSpaced)) => Ok(GFunction::oscillator(vec![1.0])),
        Some(Hamiltonian::Model(SpectrumModel::Oscillator { frequencies })) => {
            Ok(GFunction::oscillator(frequencies.clone()))
        }
        _ => Err(BoundError::Missing("g_function")),
    }
}

fn need_energy_value(input: &BoundInput) -> Result<f64, BoundError> {
    let e = input.energy.ok_or(BoundError::Missing("energy"))?;
    if !(e.is_finite() && e > 0.0) {
        return Err(BoundError::Domain(format!("energy must be positive, got {e}")));
    }
    Ok(e)
}

/// `coef * delta * F(2E/delta^2) + rest(delta)`, the purification-type shape.
fn purified(input: &BoundInput, delta: f64, coef: f64, copies: usize, rest: f64) -> Res {
    let (e, h) = input.need_energy()?;
    let f = energy_function(h, input.spectrum_constraint);
    if delta == 0.0 {
        return Ok(BoundValue::of(0.0).with("delta", 0.0));
    }
    let value = coef * delta * copies as f64 * f(2.0 * e / (delta * delta))? + rest;
    Ok(BoundValue::of(value).with("delta", delta))
}

fn winter(input: &BoundInput, shape: crate::WinterShape, eps0: f64) -> Res {
    let (e, h) = input.need_energy()?;
    let f = energy_function(h, input.spectrum_constraint);
    optimize_winter_parameter(shape, eps0, e, input.epsilon_prime, &f)
}

fn eps_or_pure_delta(input: &BoundInput) -> Result<f64, BoundError> {
    if input.flavor.pure_pair {
        input.need_eps()
    } else {
        Ok(input.need_delta()?.value)
    }
}

/// Evaluate catalog entry `id` at `input`.
pub fn evaluate_bound(id: &str, input: &BoundInput) -> Res {
    let id = entry(id).ok_or_else(|| BoundError::UnknownId(id.to_string()))?.id.as_str();
    let fl = input.flavor;
    match id {
        "entropy-afw" => {
            let (d, e) = (input.need_dim(0)?, input.need_eps()?);
            Ok(BoundValue::of(e * ln_minus_one(d)? + g(e)?))
        }
        "entropy-audenaert" => {
            let (d, e) = (input.need_dim(0)?, input.need_eps()?);
            let v = BoundValue::of(e * ln_minus_one(d)? + h2(e)?);
            Ok(within(v, e <= 1.0 - 1.0 / d as f64 + DOMAIN_SLACK, || format!("eps = {e} > 1 - 1/d")))
        }
        "generic-afw" => {
            let e = input.need_eps()?;
            let c_perp = input.need(input.c_perp, "c_perp")?;
            Ok(BoundValue::of(c_perp * e + input.need_class()?.d * g(e)?))
        }
        "observable-span" => {
            let e = input.need_eps()?;
            Ok(BoundValue::of(e * input.need(input.span, "span")?))
        }
        "class-L" | "class-N" => {
            let c = input.need_class()?;
            if input.dims.len() < c.m {
                return Err(BoundError::Missing("dims"));
            }
            let x = if id == "class-L" { input.need_eps()? } else { input.need_delta()?.value };
            Ok(BoundValue::of(c.c * x * sum_ln(&input.dims[..c.m]) + c.d * g(x)?))
        }
        "qce-afw" => {
            let (d, e) = (input.need_dim(0)?, input.need_eps()?);
            let factor = if fl.qc || fl.cq { 1.0 } else { 2.0 };
            Ok(BoundValue::of(factor * e * ln(d) + g(e)?).with("factor", factor))
        }
        "qce-wilde-qc" | "qce-cq-oneside" | "cb-equal-sa" => {
            let (d, e) = (input.need_dim(0)?, input.need_eps()?);
            let v = BoundValue::of(e * ln_minus_one(d)? + h2(e)?);
            let v = within(v, e <= 1.0 - 1.0 / d as f64 + DOMAIN_SLACK, || format!("eps = {e} > 1 - 1/d_A"));
            if id == "cb-equal-sa" && !fl.equal_entropy {
                return Ok(v.flagged("requires S(rho_A) = S(sigma_A)"));
            }
            Ok(v)
        }
        "holevo-oneside" => {
            let (n, e) = (input.need_dim(0)?, input.need_eps()?);
            let gap = input.need(input.entropy_gap, "entropy_gap")?;
            let v = BoundValue::of(e * ln_minus_one(n)? + h2(e)? + gap);
            Ok(within(v, e <= 1.0 - 1.0 / n as f64 + DOMAIN_SLACK, || format!("eps = {e} > 1 - 1/n")))
        }
        "qce-winter" | "spectrum-constraint" => {
            let mut inp = input.clone();
            inp.spectrum_constraint |= id == "spectrum-constraint";
            winter(&inp, WINTER_QCE, input.need_eps()?)
        }
        "qcmi-winter" => winter(input, WINTER_QCMI, input.need_eps()?),
        "eof-winter" | "eof-winter-reg" => {
            let e = input.need_eps()?;
            let shape = if id == "eof-winter" { WINTER_EOF } else { WINTER_EOF_REG };
            let eta = (e * (2.0 - e)).sqrt();
            if eta >= 1.0 {
                return Err(BoundError::Domain(format!("eta = sqrt(eps(2-eps)) = 1 at eps = {e}")));
            }
            Ok(winter(input, shape, eta)?.with("eta", eta))
        }
        "qce-purified" => {
            let d = eps_or_pure_delta(input)?;
            purified(input, d, 2.0, 1, g(d)?)
        }
        "L1ip" => {
            let c = input.need_class()?;
            let d = eps_or_pure_delta(input)?;
            // F_{H_m}(2mE/d^2) = m F_H(2E/d^2) for identical H_k
            purified(input, d, c.c, c.m, c.d * g(d)?)
        }
        "CBt" => {
            let c = input.need_class()?;
            cb_t_preset(&g_for(input)?, input.cbt_preset, need_energy_value(input)?, input.need_eps()?, c)
        }
        "VBmt" => {
            let c = input.need_class()?;
            vb_mt_bound(&g_for(input)?, c.m, need_energy_value(input)?, input.need_eps()?, c)
        }
        "qcmi" => {
            let (d, e) = (min_ab(input)?, input.need_eps()?);
            Ok(BoundValue::of(2.0 * e * ln(d) + 2.0 * g(e)?))
        }
        "qcmi-subspace" => {
            let (d, e) = (input.need_dim(0)?, input.need_eps()?);
            let f1 = if fl.qc || fl.cq { 1.0 } else { 2.0 };
            let f2 = if fl.equal_marginal { 1.0 } else { 2.0 };
            Ok(BoundValue::of(f1 * e * ln(d) + f2 * g(e)?))
        }
        "qcmi-energy-fid" => {
            let d = eps_or_pure_delta(input)?;
            let f2 = if fl.equal_marginal { 1.0 } else { 2.0 };
            purified(input, d, 2.0, 1, f2 * g(d)?)
        }
        "qcmi-cbt" => {
            let d = if fl.equal_marginal { 1.0 } else { 2.0 };
            cb_t_preset(&g_for(input)?, input.cbt_preset, need_energy_value(input)?, input.need_eps()?, ClassParams::cd(2.0, d)?)
        }
        "mqmi" => {
            let (n, e) = (parties(input)?, input.need_eps()?);
            Ok(BoundValue::of(e * sum_ln(&input.dims) + n as f64 * g(e)?))
        }
        "mqcmi" => {
            let (n, e) = (parties(input)?, input.need_eps()?);
            Ok(BoundValue::of(2.0 * e * sum_ln(&input.dims[..n - 1]) + n as f64 * g(e)?))
        }
        "mqmi-energy" => {
            let n = parties(input)?;
            let d = input.need_delta()?.value;
            purified(input, d, 1.0, n, n as f64 * g(d)?)
        }
        "mqmi-vb" => {
            let n = parties(input)?;
            vb_mt_bound(&g_for(input)?, n, need_energy_value(input)?, input.need_eps()?, ClassParams::cd(1.0, n as f64)?)
        }
        "mqcmi-energy" | "sq-ent-energy-m" => {
            let n = parties(input)?;
            let m = constrained_count(input, n);
            let d = input.need_delta()?.value;
            let cm = (n - 1) as f64 / m as f64;
            let (coef, rest) = if id == "mqcmi-energy" { (2.0 * cm, n as f64 * g(d)?) } else { (cm, 0.5 * n as f64 * g(d)?) };
            let v = purified(input, d, coef, m, rest)?.with("m", m as f64);
            Ok(within(v, m + 1 == n || m == n, || format!("m = {m} must be n-1 or n")))
        }
        "mqcmi-vb" => {
            let n = parties(input)?;
            let m = constrained_count(input, n);
            let cm = (n - 1) as f64 / m as f64;
            let c = ClassParams::cd(2.0 * cm, n as f64)?;
            let v = vb_mt_bound(&g_for(input)?, m, need_energy_value(input)?, input.need_eps()?, c)?;
            Ok(within(v, m + 1 == n || m == n, || format!("m = {m} must be n-1 or n")))
        }
        "eof" => {
            let d = min_ab(input)?;
            let delta = input.need_delta()?.value;
            let df = d as f64;
            let v = BoundValue::of(delta * ln_minus_one(d)? + h2(delta)?).with("delta", delta);
            let bound = (2.0 * df - 1.0) / (df * df);
            Ok(within(v, 1.0 - delta * delta >= bound - DOMAIN_SLACK, || {
                format!("1 - delta^2 = {} < (2d-1)/d^2 = {bound}", 1.0 - delta * delta)
            }))
        }
        "eof-reg" => {
            let d = min_ab(input)?;
            let delta = input.need_trace_delta()?;
            Ok(BoundValue::of(2.0 * delta * ln(d) + g(delta)?).with("delta", delta))
        }
        "eof-purified" => {
            let d = input.need_delta()?.value;
            purified(input, d, 1.0, 1, g(d)?)
        }
        "eof-purified-reg" | "chi-a-energy-reg" => {
            let d = input.need_trace_delta()?;
            purified(input, d, 2.0, 1, g(d)?)
        }
        "cb-da" | "db-da" => {
            let (d, e) = (input.need_dim(0)?, input.need_eps()?);
            let factor = if id == "cb-da" { 1.0 } else { 2.0 };
            Ok(BoundValue::of(factor * e * ln(d) + 2.0 * g(e)?))
        }
        "cb-db" | "db-db" => {
            let (d, e) = (input.need_dim(1)?, input.need_eps()?);
            let f2 = if fl.equal_marginal { 1.0 } else { 2.0 };
            Ok(BoundValue::of(e * ln(d) + f2 * g(e)?))
        }
        "cb-reg-a" | "cb-reg-b" => {
            let delta = input.need_delta()?.value;
            let e = (delta * (2.0 - delta)).sqrt();
            let dim = if id == "cb-reg-a" { input.need_dim(0)? } else { 2 * input.need_dim(1)? };
            Ok(BoundValue::of(2.0 * e * ln(dim) + g(e)?).with("epsilon_reg", e))
        }
        "cb-energy" | "db-energy" => {
            let c = if id == "cb-energy" || input.constrained == Constrained::B { 1.0 } else { 2.0 };
            cb_t_preset(&g_for(input)?, input.cbt_preset, need_energy_value(input)?, input.need_eps()?, ClassParams::cd(c, 2.0)?)
        }
        "cb-energy-fid" | "db-energy-fid" => {
            let d = input.need_delta()?.value;
            let c = if id == "cb-energy-fid" || input.constrained == Constrained::B { 1.0 } else { 2.0 };
            purified(input, d, c, 1, 2.0 * g(d)?)
        }
        "cb-energy-reg" => {
            let delta = input.need_delta()?.value;
            let e = (delta * (2.0 - delta)).sqrt();
            let cx = if input.constrained == Constrained::A { 2.0 } else { 1.0 };
            Ok(purified(input, e, 2.0, 1, 2.0 * e * (3.0 - cx as f64).ln() + g(e)?)?.with("epsilon_reg", e))
        }
        "c-up" => {
            let d = input.need_dim(0)?;
            let ds = input.need(input.delta_star, "delta_star")?;
            crate::input::check_unit("delta_star", ds)?;
            let v = BoundValue::of(ds * ln_minus_one(d)? + h2(ds)?);
            Ok(within(v, ds <= 1.0 - 1.0 / d as f64 + DOMAIN_SLACK, || format!("Delta* = {ds} > 1 - 1/d_A")))
        }
        "d-up" => {
            let d = input.need_dim(1)?;
            let u = input.need(input.upsilon, "upsilon")?;
            crate::input::check_unit("upsilon", u)?;
            Ok(BoundValue::of(u * ln(d) + g(u)?))
        }
        "chi-a" => {
            let d = input.need_dim(0)?;
            let delta = input.need_delta()?;
            let cg = if delta.origin == DeltaOrigin::Fidelity { 2.0 } else { 1.0 };
            Ok(BoundValue::of(delta.value * ln(d) + cg * g(delta.value)?))
        }
        "chi-a-reg" => {
            let d = input.need_dim(0)?;
            let delta = input.need_trace_delta()?;
            Ok(BoundValue::of(2.0 * delta * ln(d) + g(delta)?))
        }
        "chi-a-energy" => {
            let delta = input.need_delta()?;
            let d = delta.value;
            let fid = purified(input, d, 1.0, 1, 2.0 * g(d)?)?;
            if delta.origin == DeltaOrigin::Trace {
                let alt = purified(input, d, 2.0, 1, g(d)?)?;
                if alt.value < fid.value {
                    return Ok(alt);
                }
            }
            Ok(fid)
        }
        "sq-ent" => {
            let d = min_ab(input)?;
            let delta = input.need_delta()?.value;
            Ok(BoundValue::of(delta * ln(d) + g(delta)?))
        }
        "sq-ent-n" => {
            let n = parties(input)?;
            let delta = input.need_delta()?.value;
            Ok(BoundValue::of(delta * sum_ln(&input.dims[..n - 1]) + 0.5 * n as f64 * g(delta)?))
        }
        "sq-ent-energy" => {
            let d = input.need_delta()?.value;
            purified(input, d, 1.0, 1, g(d)?)
        }
        other => Err(BoundError::UnknownId(other.to_string())),
    }
}
