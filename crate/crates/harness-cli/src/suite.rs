//! The default verification suite: every certifiable entry at small
//! dimensions, a few trials per cell, fixed seeds.

use crate::quantity::Quantity;
use crate::sampler::{PairFlavor, Strategy};
use crate::verify::VerificationConfig;

const EPS: [f64; 4] = [0.0, 0.1, 0.25, 0.5];
const TRIALS: usize = 20;

pub fn default_suite(master_seed: u64) -> Vec<VerificationConfig> {
    use PairFlavor::*;
    let rows: &[(&str, &[usize], PairFlavor, Option<f64>)] = &[
        ("entropy-afw", &[2], General, None),
        ("entropy-afw", &[4], General, None),
        ("entropy-afw", &[16], General, None),
        ("entropy-audenaert", &[3], General, None),
        ("entropy-audenaert", &[8], General, None),
        ("observable-span", &[4], General, None),
        ("qce-afw", &[2, 2], General, None),
        ("qce-afw", &[3, 2], Qc, None),
        ("qce-afw", &[2, 4], Cq, None),
        ("qce-wilde-qc", &[3, 3], Qc, None),
        ("qce-cq-oneside", &[3, 2], Classical, None),
        ("holevo-oneside", &[3, 2], Classical, None),
        ("qce-winter", &[4, 2], General, Some(1.0)),
        ("qce-purified", &[4, 2], General, Some(1.0)),
        ("qcmi", &[2, 2, 2], General, None),
        ("qcmi-subspace", &[2, 2, 2], General, None),
        ("qcmi-winter", &[3, 2, 2], General, Some(0.8)),
        ("qcmi-energy-fid", &[3, 2, 2], General, Some(0.8)),
        ("mqmi", &[2, 2, 2], General, None),
        ("mqcmi", &[2, 2, 2], General, None),
        ("eof", &[2, 2], Pure, None),
        ("eof-reg", &[2, 3], Pure, None),
        ("eof-winter", &[4, 2], Pure, Some(1.0)),
        ("eof-winter-reg", &[4, 2], Pure, Some(1.0)),
        ("eof-purified", &[4, 2], Pure, Some(1.0)),
        ("eof-purified-reg", &[4, 2], Pure, Some(1.0)),
        ("sq-ent", &[2, 3], Pure, None),
        ("sq-ent-energy", &[4, 2], Pure, Some(1.0)),
        ("cb-da", &[2, 2], Qc, None),
        ("cb-db", &[3, 2], Qc, None),
        ("db-da", &[2, 2], Qc, None),
        ("db-db", &[2, 3], Classical, None),
        ("cb-energy", &[4, 2], Qc, Some(1.0)),
        ("db-energy", &[4, 2], Qc, Some(1.0)),
        ("cb-energy-fid", &[4, 2], Qc, Some(1.0)),
        ("db-energy-fid", &[4, 2], Qc, Some(1.0)),
    ];
    let mut out: Vec<VerificationConfig> = rows
        .iter()
        .map(|&(id, dims, flavor, energy)| {
            let cfg = VerificationConfig::new(id, dims, EPS.to_vec(), TRIALS, master_seed).flavor(flavor);
            match energy {
                Some(e) => cfg.energy(e),
                None => cfg,
            }
        })
        .collect();
    // u-state pairs on a qubit have equal spectra; mixing gives a nonzero LHS.
    out[0] = out[0].clone().sampler(Strategy::Mix);
    // Estimate-based rows: reported, never counted as violations.
    for (id, q) in [("eof", Quantity::EofEstimate), ("cb-da", Quantity::ClassicalCorrelationEstimate), ("db-da", Quantity::DiscordEstimate)] {
        out.push(VerificationConfig::new(id, &[2, 2], vec![0.05, 0.1], 4, master_seed).quantity(q));
    }
    // A delta-parametrized grid.
    out.push(VerificationConfig::new("eof", &[2, 2], vec![], TRIALS, master_seed).flavor(Pure).delta_grid(vec![0.1, 0.3]));
    out
}
