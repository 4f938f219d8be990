//! Step-down selection of covariates whose omission causes spurious
//! diffusion, with simulated max-|t| critical values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{empirical_percentile, psd_sqrt, RngStream, SymMatrix};

const SIGMA2_FLOOR: f64 = 1e-12;

/// `1-α` percentile of `max_{s∈active} |(Ω_A^{1/2} Z)_s| / σ_s` over `draws`
/// standard-normal vectors.
pub fn critical_value(
    omega: &SymMatrix,
    sigma: &[f64],
    active: &[usize],
    alpha: f64,
    draws: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    if draws < 100 {
        return Err(Error::InvalidConfig(format!(
            "{draws} draws; at least 100 required"
        )));
    }
    if active.is_empty() {
        return Err(Error::EmptySample);
    }
    if sigma.len() != omega.dim() {
        return Err(Error::SizeMismatch {
            expected: omega.dim(),
            got: sigma.len(),
        });
    }
    if let Some(&index) = active
        .iter()
        .find(|&&s| !(sigma[s] > 0.0 && sigma[s].is_finite()))
    {
        return Err(Error::DegenerateSigma { index });
    }
    let root = psd_sqrt(&omega.submatrix(active))?.root;
    let k = active.len();
    let mut z = vec![0.0; k];
    let stats: Vec<f64> = (0..draws)
        .map(|_| {
            z.iter_mut().for_each(|v| *v = rng.std_normal());
            let rz = root.mul_vec(&z);
            rz.iter()
                .zip(active)
                .map(|(v, &s)| v.abs() / sigma[s])
                .fold(0.0, f64::max)
        })
        .collect();
    empirical_percentile(&stats, 1.0 - alpha)
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    /// Family labels still retained at the start of the step.
    pub active: Vec<usize>,
    pub critical_value_raw: f64,
    /// After capping by the previous step's value.
    pub critical_value: f64,
    pub rejected: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepDownResult {
    /// Labels whose hypothesis of no spurious diffusion is rejected.
    pub selected: Vec<usize>,
    pub retained: Vec<usize>,
    pub labels: Vec<usize>,
    pub statistics: Vec<f64>,
    pub sigma: Vec<f64>,
    pub trace: Vec<StepRecord>,
    pub draws: usize,
    pub alpha: f64,
}

fn subset_tag(positions: &[usize]) -> u64 {
    positions.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &p| {
        (h ^ (p as u64 + 1)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Step-down procedure over the family `labels` with estimates
/// `delta_hats` and cross-covariance `omega` (family order).
///
/// Each evaluated subset draws from `rng.derive(tag)` with `tag` a hash of
/// the subset, so the result depends only on the inputs and the seed.
pub fn stepdown(
    labels: &[usize],
    delta_hats: &[f64],
    omega: &SymMatrix,
    n: usize,
    alpha: f64,
    draws: usize,
    rng: &RngStream,
) -> Result<StepDownResult> {
    let k = labels.len();
    for len in [delta_hats.len(), omega.dim()] {
        if len != k {
            return Err(Error::SizeMismatch {
                expected: k,
                got: len,
            });
        }
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let sigma: Vec<f64> = omega
        .diag()
        .iter()
        .map(|&v| v.max(SIGMA2_FLOOR).sqrt())
        .collect();
    let statistics: Vec<f64> = (0..k)
        .map(|s| (n as f64).sqrt() * delta_hats[s].abs() / sigma[s])
        .collect();

    let mut retained: Vec<usize> = (0..k).collect();
    let mut trace = Vec::new();
    let mut cap = f64::INFINITY;
    while !retained.is_empty() {
        let mut stream = rng.derive(subset_tag(&retained));
        let raw = critical_value(omega, &sigma, &retained, alpha, draws, &mut stream)?;
        let c = raw.min(cap);
        cap = c;
        let next: Vec<usize> = (0..k).filter(|&s| statistics[s] <= c).collect();
        trace.push(StepRecord {
            active: retained.iter().map(|&s| labels[s]).collect(),
            critical_value_raw: raw,
            critical_value: c,
            rejected: retained
                .iter()
                .filter(|s| !next.contains(s))
                .map(|&s| labels[s])
                .collect(),
        });
        if next == retained {
            break;
        }
        retained = next;
    }
    let selected = (0..k)
        .filter(|s| !retained.contains(s))
        .map(|s| labels[s])
        .collect();
    Ok(StepDownResult {
        selected,
        retained: retained.iter().map(|&s| labels[s]).collect(),
        labels: labels.to_vec(),
        statistics,
        sigma,
        trace,
        draws,
        alpha,
    })
}
