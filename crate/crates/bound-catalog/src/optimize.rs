use std::collections::BTreeMap;

use entropic::{binary_entropy, g_fn};

use crate::input::{check_unit, CbtPreset, ClassParams, GFunction, Hamiltonian};
use crate::{BoundError, BoundValue};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

pub(crate) fn g(x: f64) -> Result<f64, BoundError> {
    g_fn(x).map_err(|e| BoundError::Domain(e.to_string()))
}

pub(crate) fn h2(x: f64) -> Result<f64, BoundError> {
    binary_entropy(x).map_err(|e| BoundError::Domain(e.to_string()))
}

/// Minimize `f` over `[lo, hi]` (0 < lo < hi): a log-spaced scan of
/// `points` abscissae, then golden-section search between the neighbours of
/// the best scan point. Returns `(argmin, min)`.
pub fn log_scan_minimize<F>(mut f: F, lo: f64, hi: f64, points: usize) -> Result<(f64, f64), BoundError>
where
    F: FnMut(f64) -> Result<f64, BoundError>,
{
    assert!(lo > 0.0 && hi > lo && points >= 3);
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let at = |i: usize| if i + 1 == points { uhi } else { ulo + (uhi - ulo) * i as f64 / (points - 1) as f64 };
    let mut best = (0usize, f64::INFINITY);
    for i in 0..points {
        let v = f(at(i).exp())?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let (mut a, mut b) = (at(best.0.saturating_sub(1)), at((best.0 + 1).min(points - 1)));
    let mut arg = (at(best.0).exp(), best.1);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c.exp())?, f(d.exp())?);
    for _ in 0..120 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d.exp())?;
        }
    }
    for (u, v) in [(c, fc), (d, fd)] {
        if v < arg.1 {
            arg = (u.exp(), v);
        }
    }
    Ok(arg)
}

/// Coefficients of a Winter-type bound
/// `(a eps' + b delta) F(E/delta) + cg g(eps') + ch h2(delta)`,
/// `delta = (eps' - eps0)/(1 + eps')`.
#[derive(Debug, Clone, Copy)]
pub struct WinterShape {
    pub a: f64,
    pub b: f64,
    pub cg: f64,
    pub ch: f64,
}

pub const WINTER_QCE: WinterShape = WinterShape { a: 2.0, b: 4.0, cg: 1.0, ch: 2.0 };
pub const WINTER_QCMI: WinterShape = WinterShape { a: 2.0, b: 4.0, cg: 2.0, ch: 4.0 };
pub const WINTER_EOF: WinterShape = WinterShape { a: 1.0, b: 2.0, cg: 1.0, ch: 2.0 };
pub const WINTER_EOF_REG: WinterShape = WinterShape { a: 2.0, b: 4.0, cg: 1.0, ch: 2.0 };

pub(crate) fn winter_value(
    shape: WinterShape,
    eps0: f64,
    eps_prime: f64,
    energy: f64,
    f_h: &dyn Fn(f64) -> Result<f64, BoundError>,
) -> Result<f64, BoundError> {
    let delta = (eps_prime - eps0) / (1.0 + eps_prime);
    if !(delta > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok((shape.a * eps_prime + shape.b * delta) * f_h(energy / delta)? + shape.cg * g(eps_prime)? + shape.ch * h2(delta)?)
}

/// Minimize a Winter-type bound over `eps' in (eps0, 1]`: 64-point log scan
/// of `eps' - eps0` plus golden-section refinement. The result never exceeds
/// the value at `eps' = sqrt(eps0)`.
pub(crate) fn winter_minimize(
    shape: WinterShape,
    eps0: f64,
    energy: f64,
    f_h: &dyn Fn(f64) -> Result<f64, BoundError>,
) -> Result<(f64, f64), BoundError> {
    let span = 1.0 - eps0;
    let (s, v) = log_scan_minimize(|s| winter_value(shape, eps0, eps0 + s, energy, f_h), span * 1e-12, span, 64)?;
    let mut best = (eps0 + s, v);
    let root = eps0.sqrt();
    if root > eps0 {
        let vr = winter_value(shape, eps0, root, energy, f_h)?;
        if vr < best.1 {
            best = (root, vr);
        }
    }
    Ok(best)
}

/// `Winter`-type bound for an arbitrary F_H, optimized or at a fixed eps'.
pub fn optimize_winter_parameter(
    shape: WinterShape,
    eps0: f64,
    energy: f64,
    eps_prime: Option<f64>,
    f_h: &dyn Fn(f64) -> Result<f64, BoundError>,
) -> Result<BoundValue, BoundError> {
    if !(eps0 >= 0.0 && eps0 < 1.0) {
        return Err(BoundError::Domain(format!("Winter-type bounds need 0 <= eps < 1, got {eps0}")));
    }
    let mut params = BTreeMap::new();
    let (ep, value) = match eps_prime {
        Some(ep) => {
            if !(ep > eps0 && ep <= 1.0) {
                return Err(BoundError::Domain(format!("eps' = {ep} outside ({eps0}, 1]")));
            }
            (ep, winter_value(shape, eps0, ep, energy, f_h)?)
        }
        None if eps0 == 0.0 => {
            params.insert("eps_prime".into(), 0.0);
            return Ok(BoundValue::valid(0.0, params));
        }
        None => winter_minimize(shape, eps0, energy, f_h)?,
    };
    params.insert("eps_prime".into(), ep);
    params.insert("delta".into(), (ep - eps0) / (1.0 + ep));
    Ok(BoundValue::valid(value, params))
}

/// Smallest `x >= 0` with `G(x) >= y`, for nondecreasing G.
fn g_inverse(g: &GFunction, y: f64) -> Result<f64, BoundError> {
    if g.eval(0.0) >= y {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while g.eval(hi) < y {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(BoundError::Domain(format!("G never reaches {y}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g.eval(mid) >= y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `(T, Delta)` of the advanced bound for the given preset.
pub fn cbt_parameters(g: &GFunction, preset: CbtPreset, energy: f64, eps: f64) -> Result<(f64, f64), BoundError> {
    match preset {
        CbtPreset::Oscillator => {
            let GFunction::Oscillator { frequencies } = g else {
                return Err(BoundError::Domain("oscillator preset needs an oscillator G".into()));
            };
            let l = frequencies.len() as f64;
            let e0 = 0.5 * frequencies.iter().sum::<f64>();
            Ok(((1.0 / eps) * (energy / e0).sqrt().min(1.0), (-l).exp() + 2f64.ln()))
        }
        CbtPreset::General => {
            let g0 = g.eval(0.0);
            if !(g0 < 700.0) {
                return Err(BoundError::Domain(format!("G(0) = {g0} too large for d0")));
            }
            let d0 = if g0 < 0.0 { 1.0 } else { g0.exp().floor() + 1.0 };
            let x = g_inverse(g, d0.ln())?;
            let t = if x == 0.0 { 1.0 / eps } else { (1.0 / eps) * (energy / x).sqrt().min(1.0) };
            Ok((t, 1.0 / d0 + 2f64.ln()))
        }
    }
}

pub fn cb_t_value(gf: &GFunction, energy: f64, eps: f64, class: ClassParams, delta: f64, t: f64) -> Result<f64, BoundError> {
    let et = eps * t;
    Ok(class.c * eps * (1.0 + 4.0 * t) * (gf.eval(energy / (et * et)) + delta)
        + class.d * (2.0 * g(et)? + g(eps * (1.0 + 2.0 * t))?))
}

/// `min_{t in (0, T]} CB_t(E, eps | C, D)`; the minimizer is reported as `t`.
pub fn cb_t_bound(
    g: &GFunction,
    energy: f64,
    eps: f64,
    class: ClassParams,
    delta: f64,
    t_max: f64,
) -> Result<BoundValue, BoundError> {
    check_unit("epsilon", eps)?;
    let mut params = BTreeMap::new();
    params.insert("T".into(), t_max);
    params.insert("Delta".into(), delta);
    if eps == 0.0 {
        return Ok(BoundValue::valid(0.0, params));
    }
    if !(energy > 0.0) || !(t_max > 0.0) {
        return Err(BoundError::Domain(format!("need E > 0 and T > 0 (got {energy}, {t_max})")));
    }
    let (t, v) = log_scan_minimize(|t| cb_t_value(g, energy, eps, class, delta, t), t_max * 1e-10, t_max, 256)?;
    params.insert("t".into(), t);
    Ok(BoundValue::valid(v, params))
}

/// `cb_t_bound` with T and Delta fixed by the preset.
pub fn cb_t_preset(
    g: &GFunction,
    preset: CbtPreset,
    energy: f64,
    eps: f64,
    class: ClassParams,
) -> Result<BoundValue, BoundError> {
    check_unit("epsilon", eps)?;
    if eps == 0.0 {
        return Ok(BoundValue::valid(0.0, BTreeMap::new()));
    }
    let (t_max, delta) = cbt_parameters(g, preset, energy, eps)?;
    cb_t_bound(g, energy, eps, class, delta, t_max)
}

pub fn vb_value(gf: &GFunction, m: usize, energy: f64, eps: f64, class: ClassParams, t: f64) -> Result<f64, BoundError> {
    let m = m as f64;
    let et = eps * t;
    let a = eps + et * et;
    let r = (2.0 * et).sqrt();
    Ok(class.c * m * (a * gf.eval(m * energy / (et * et)) + 2.0 * r * gf.eval(energy / et))
        + class.d * (g(a)? + 2.0 * g(r)?))
}

/// `min_{t in (0, 1/eps)} VB^m_t(E, eps | C, D)`.
pub fn vb_mt_bound(g: &GFunction, m: usize, energy: f64, eps: f64, class: ClassParams) -> Result<BoundValue, BoundError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(BoundError::Domain(format!("VB needs eps in (0, 1], got {eps}")));
    }
    if m == 0 || !(energy > 0.0) {
        return Err(BoundError::Domain(format!("VB needs m >= 1 and E > 0 (got {m}, {energy})")));
    }
    let hi = (1.0 / eps) * (1.0 - 1e-12);
    let (t, v) = log_scan_minimize(|t| vb_value(g, m, energy, eps, class, t), hi * 1e-10, hi, 256)?;
    let mut params = BTreeMap::new();
    params.insert("t".into(), t);
    Ok(BoundValue::valid(v, params))
}

/// F_H with the optional spectrum-constraint substitution `F_D + ln 2`.
pub(crate) fn energy_function(h: &Hamiltonian, spectrum_constraint: bool) -> impl Fn(f64) -> Result<f64, BoundError> + '_ {
    move |x| {
        let f = h.f_h(x)?;
        Ok(if spectrum_constraint { f + 2f64.ln() } else { f })
    }
}
