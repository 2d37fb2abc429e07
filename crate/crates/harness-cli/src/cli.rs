//! The `qcont` command line. Exit codes: 0 pass, 2 violation, 1 usage error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use approx_dini::{
    designed_mixture, dominated_convergence_check, entropy_jump_experiment, mixture_convergence_check, DiniQuantity,
    SequenceSpec,
};
use bound_catalog::{catalog, catalog_json, evaluate_bound, BoundInput, DeltaOrigin, Hamiltonian};
use clap::{Args, Parser, Subcommand, ValueEnum};
use energy_gibbs::{gibbs_point, HamiltonianSpectrum, SpectrumModel};
use serde_json::json;

use crate::adversarial::adversarial_search;
use crate::suite::default_suite;
use crate::verify::{verify_many, write_csv, VerificationConfig};
use crate::{HarnessError, HarnessResult};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qcont", version, about = "Continuity bounds for quantum entropic quantities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate catalog bounds.
    Bounds {
        #[command(subcommand)]
        action: BoundsAction,
    },
    /// Randomized certification; writes the CSV report.
    Verify(VerifyArgs),
    /// Replay a witness pair, or search for a near-extremal pair.
    Tightness(TightnessArgs),
    /// Gibbs point of an explicit spectrum.
    Gibbs {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        energy: f64,
    },
    /// Approximation experiments on designed sequences.
    Dini {
        #[arg(long, value_enum)]
        experiment: Experiment,
        #[arg(long, default_value = "")]
        params: String,
    },
    /// The bound registry.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand, Debug)]
enum BoundsAction {
    Eval(EvalArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    bound: String,
    /// e.g. `2x4`
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value = "trace")]
    origin: Origin,
    #[arg(long)]
    energy: Option<f64>,
    /// Eigenvalues of H, one per line; the unit-spaced oscillator otherwise.
    #[arg(long, requires = "energy")]
    spectrum: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Origin {
    Trace,
    Fidelity,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// A JSON VerificationConfig, or an array of them.
    #[arg(long, conflicts_with_all = ["bound", "suite"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "bound")]
    suite: Option<SuiteName>,
    #[arg(long, requires = "dims")]
    bound: Option<String>,
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    /// `a:b:n`, n evenly spaced points from a to b.
    #[arg(long, value_parser = parse_grid, conflicts_with = "delta_grid")]
    eps_grid: Option<GridArg>,
    #[arg(long, value_parser = parse_grid)]
    delta_grid: Option<GridArg>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    quantity: Option<String>,
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    flavor: Option<String>,
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Test mode: multiply every bound by this factor.
    #[arg(long)]
    test_scale_bound: Option<f64>,
    /// CSV destination; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteName {
    Default,
}

#[derive(Args, Debug)]
struct TightnessArgs {
    #[arg(long, value_enum, required_unless_present = "bound", conflicts_with = "bound")]
    witness: Option<WitnessKind>,
    /// `k=v,...`: `n,eps` (wilde, cq), `d` (discord, cup), `energy,eps[,levels]` (winter, cmi).
    #[arg(long, default_value = "")]
    params: String,
    /// Adversarial search for this entry instead of a witness.
    #[arg(long, requires_all = ["dims", "eps"])]
    bound: Option<String>,
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the witness pair as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WitnessKind {
    Wilde,
    Cq,
    Discord,
    Cup,
    Winter,
    Cmi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Jump,
    Dct,
    Mixture,
}

// Newtypes so clap reads one `2x4` token rather than a value list.
#[derive(Debug, Clone)]
struct Dims(Vec<usize>);

#[derive(Debug, Clone)]
struct GridArg(Vec<f64>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let dims: Vec<usize> = s
        .split(['x', 'X', ','])
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad dimension {p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err("dimensions must be positive".into());
    }
    Ok(Dims(dims))
}

fn parse_grid(s: &str) -> Result<GridArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    let grid = match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|e| format!("bad count {n:?}: {e}"))?;
            match n {
                0 => Err("grid needs at least one point".into()),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
            }
        }
        [x] => Ok(vec![num(x)?]),
        _ => Err(format!("grid {s:?} is not a:b:n")),
    };
    grid.map(GridArg)
}

fn parse_params(s: &str) -> HarnessResult<BTreeMap<String, f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| HarnessError::Usage(format!("parameter {p:?} is not k=v")))?;
            let v = v.trim().parse::<f64>().map_err(|e| HarnessError::Usage(format!("parameter {k}: {e}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn get(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> HarnessResult<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| HarnessError::Usage(format!("missing parameter {key}")))
}

fn count(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> HarnessResult<usize> {
    let v = get(params, key, default)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(HarnessError::Usage(format!("{key} must be a non-negative integer")));
    }
    Ok(v as usize)
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> HarnessResult<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn bounds_eval(a: &EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> HarnessResult<i32> {
    let mut input = BoundInput::new();
    if let Some(Dims(d)) = &a.dims {
        input = input.dims(d);
    }
    if let Some(e) = a.eps {
        input = input.eps(e);
    }
    if let Some(d) = a.delta {
        let origin = match a.origin {
            Origin::Trace => DeltaOrigin::Trace,
            Origin::Fidelity => DeltaOrigin::Fidelity,
        };
        input = input.delta(d, origin);
    }
    if let Some(e) = a.energy {
        let h = match &a.spectrum {
            Some(path) => Hamiltonian::Spectrum(HamiltonianSpectrum::from_file(path)?),
            None => Hamiltonian::Model(SpectrumModel::UnitSpaced),
        };
        input = input.energy(e, h);
    }
    let v = evaluate_bound(&a.bound, &input)?;
    if a.json {
        print_json(out, &json!({ "bound_id": a.bound, "value": v.value, "valid": v.valid,
            "validity_reason": v.validity_reason, "chosen_params": v.chosen_params }))?;
    } else {
        writeln!(out, "{:.6}", v.value)?;
        if !v.valid {
            writeln!(err, "warning: outside the validity domain: {}", v.validity_reason)?;
        }
    }
    Ok(EXIT_PASS)
}

fn verify_configs(a: &VerifyArgs) -> HarnessResult<Vec<VerificationConfig>> {
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        return Ok(match v {
            serde_json::Value::Array(_) => serde_json::from_value(v)?,
            _ => vec![serde_json::from_value(v)?],
        });
    }
    if a.suite.is_some() {
        return Ok(default_suite(a.seed));
    }
    let bound = a.bound.as_ref().ok_or_else(|| HarnessError::Usage("give --config, --suite or --bound".into()))?;
    let dims = &a.dims.as_ref().ok_or_else(|| HarnessError::Usage("--bound needs --dims".into()))?.0;
    let mut cfg = VerificationConfig::new(bound, dims, vec![], a.trials, a.seed);
    cfg.eps_grid = None;
    match (&a.eps_grid, &a.delta_grid) {
        (Some(g), None) => cfg.eps_grid = Some(g.0.clone()),
        (None, Some(g)) => cfg.delta_grid = Some(g.0.clone()),
        _ => return Err(HarnessError::Usage("give --eps-grid or --delta-grid".into())),
    }
    cfg.quantity_id = a.quantity.clone();
    if let Some(s) = &a.sampler {
        cfg.sampler = s.parse()?;
    }
    if let Some(f) = &a.flavor {
        cfg.flavor = f.parse()?;
    }
    cfg.energy = a.energy;
    if let Some(t) = a.tolerance {
        cfg.tolerance = t;
    }
    Ok(vec![cfg])
}

fn verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> HarnessResult<i32> {
    let mut cfgs = verify_configs(a)?;
    if let Some(s) = a.test_scale_bound {
        for c in &mut cfgs {
            c.rhs_scale = Some(s);
        }
    }
    let reports = verify_many(&cfgs)?;
    match &a.out {
        Some(path) => write_csv(&reports, BufWriter::new(File::create(path)?))?,
        None => write_csv(&reports, &mut *out)?,
    }
    let violations: usize = reports.iter().map(|r| r.violations()).sum();
    let cells: usize = reports.iter().map(|r| r.cells.len()).sum();
    writeln!(err, "{} configs, {cells} cells, {violations} violations", reports.len())?;
    for r in &reports {
        for c in r.cells.iter().filter(|c| c.violations > 0) {
            writeln!(err, "violation: {} eps_or_delta={} seed={}", c.bound_id, c.eps_or_delta, c.seed)?;
        }
    }
    Ok(if violations > 0 { EXIT_VIOLATION } else { EXIT_PASS })
}

const TIGHTNESS_TOL: f64 = 1e-9;

fn tightness(a: &TightnessArgs, out: &mut dyn Write) -> HarnessResult<i32> {
    if let Some(id) = &a.bound {
        let (dims, eps) = (&a.dims.as_ref().unwrap().0, a.eps.unwrap());
        let r = adversarial_search(id, dims, eps, a.restarts, a.seed)?;
        print_json(out, &serde_json::to_value(&r)?)?;
        return Ok(if r.violation { EXIT_VIOLATION } else { EXIT_PASS });
    }
    let p = parse_params(&a.params)?;
    let kind = a.witness.unwrap();
    let (bound_id, lhs, rhs, pair) = match kind {
        WitnessKind::Wilde | WitnessKind::Cq | WitnessKind::Discord | WitnessKind::Cup => {
            let w = match kind {
                WitnessKind::Wilde => afw_lab::wilde_witness(count(&p, "n", None)?, get(&p, "eps", None)?)?,
                WitnessKind::Cq => afw_lab::cq_witness(count(&p, "n", None)?, get(&p, "eps", None)?)?,
                WitnessKind::Discord => afw_lab::discord_witness(count(&p, "d", None)?)?,
                _ => afw_lab::cup_witness(count(&p, "d", None)?)?,
            };
            let mut input = BoundInput::new().dims(&[w.rho.layout().dims()[0]]);
            if let Some(&e) = w.params.get("epsilon") {
                input = input.eps(e);
            }
            input.delta_star = w.params.get("delta_star").copied();
            let rhs = evaluate_bound(&w.bound_id, &input)?.value;
            let lhs = w.measured_lhs()?.unwrap_or(w.claimed_lhs);
            (w.bound_id.clone(), lhs, rhs, Some(w))
        }
        WitnessKind::Winter | WitnessKind::Cmi => {
            let (e, eps) = (get(&p, "energy", None)?, get(&p, "eps", None)?);
            let levels = p.contains_key("levels").then(|| count(&p, "levels", None)).transpose()?;
            let model = SpectrumModel::UnitSpaced;
            let (w, id) = match kind {
                WitnessKind::Winter => (afw_lab::winter_energy_witness(&model, e, eps, levels)?, "qce-winter"),
                _ => (afw_lab::cmi_energy_witness(&model, e, eps, levels)?, "qcmi-winter"),
            };
            let input = BoundInput::new().eps(eps).energy(e, Hamiltonian::Model(model));
            let rhs = evaluate_bound(id, &input)?.value;
            (id.to_string(), w.gap, rhs, w.pair)
        }
    };
    if let (Some(path), Some(w)) = (&a.out, &pair) {
        std::fs::write(path, w.to_json())?;
    }
    let margin = rhs - lhs;
    print_json(out, &json!({ "bound_id": bound_id, "lhs": lhs, "rhs": rhs, "margin": margin,
        "ratio": if rhs > 0.0 { lhs / rhs } else { f64::NAN } }))?;
    Ok(if margin < -TIGHTNESS_TOL { EXIT_VIOLATION } else { EXIT_PASS })
}

fn gibbs(spectrum: &PathBuf, energy: f64, out: &mut dyn Write) -> HarnessResult<i32> {
    let spec = HamiltonianSpectrum::from_file(spectrum)?;
    let g = gibbs_point(&spec, energy)?;
    print_json(out, &json!({ "energy": g.energy, "beta": g.beta, "entropy": g.entropy, "tail_mass": g.tail_mass,
        "saturated": g.saturated, "residual": g.residual, "levels": g.levels }))?;
    Ok(EXIT_PASS)
}

fn dini(experiment: Experiment, params: &str, out: &mut dyn Write) -> HarnessResult<i32> {
    let p = parse_params(params)?;
    let n_max = count(&p, "n_max", Some(20.0))? as u32;
    let m_max = count(&p, "m_max", Some(8.0))?;
    let m_grid: Vec<usize> = (1..=m_max).collect();
    let even: Vec<u32> = (1..=n_max / 2).map(|k| 2 * k).collect();
    match experiment {
        Experiment::Jump => {
            let c = get(&p, "c", Some(0.5))?;
            let seq = SequenceSpec::new("jump", &[("c", c)], even).build()?;
            let rep = entropy_jump_experiment(&seq, &m_grid)?;
            print_json(out, &json!({ "c": c, "estimated_jump": rep.estimated_jump, "plateau": rep.plateau,
                "other_order": rep.other_order, "orders_disagree": rep.orders_disagree, "per_m": rep.per_m }))?;
            Ok(EXIT_PASS)
        }
        Experiment::Dct => {
            let c = get(&p, "c", Some(0.5))?;
            let w = get(&p, "weight", Some(0.5))?;
            let ratio = get(&p, "ratio", Some(w))?;
            let rho = SequenceSpec::new("jump", &[("c", c)], even.clone()).build()?;
            let tau = SequenceSpec::new("dominating", &[("c", c), ("weight", w)], even).build()?;
            let rep = dominated_convergence_check(&rho, &tau, ratio, DiniQuantity::Entropy, &m_grid)?;
            print_json(out, &serde_json::to_value(&rep)?)?;
            Ok(if rep.holds { EXIT_PASS } else { EXIT_VIOLATION })
        }
        Experiment::Mixture => {
            let p0 = get(&p, "p0", Some(0.4))?;
            let grid: Vec<u32> = (1..=n_max.max(1)).collect();
            let (rho, sigma, ps, p0) = designed_mixture(&grid, p0)?;
            let rep = mixture_convergence_check(&rho, &sigma, &ps, p0)?;
            print_json(out, &serde_json::to_value(&rep)?)?;
            Ok(if rep.holds { EXIT_PASS } else { EXIT_VIOLATION })
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> HarnessResult<i32> {
    match cli.command {
        Command::Bounds { action: BoundsAction::Eval(a) } => bounds_eval(&a, out, err),
        Command::Verify(a) => verify(&a, out, err),
        Command::Tightness(a) => tightness(&a, out),
        Command::Gibbs { spectrum, energy } => gibbs(&spectrum, energy, out),
        Command::Dini { experiment, params } => dini(experiment, &params, out),
        Command::Catalog { action: CatalogAction::List { json } } => {
            if json {
                writeln!(out, "{}", catalog_json())?;
            } else {
                for e in catalog() {
                    writeln!(out, "{:<20} {}", e.id, e.formula_text)?;
                }
            }
            Ok(EXIT_PASS)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        // A closed pipe (`qcont catalog list | head`) is not a failure.
        Err(HarnessError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_PASS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}
