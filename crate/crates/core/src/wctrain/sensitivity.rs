use super::train::verify_options;
use super::{train_standard, SensitivityReport, TrainError};
use crate::grid::Dataset;
use crate::mlp::{GenBounds, MlpParams, TrainConfig};
use crate::verifier::{solve_worst_case_with, wc_gradient, InputBox};

/// Mean absolute entry of each affine layer (weights and bias together).
fn layer_means(g: &MlpParams) -> Vec<f64> {
    (0..g.n_layers())
        .map(|k| {
            let (s, n) = g.layer_iter(k).fold((0.0, 0usize), |(s, n), v| (s + v.abs(), n + 1));
            s / n as f64
        })
        .collect()
}

/// For every seed: train a standard network, certify its worst case and take
/// the full envelope gradient. Per-layer mean absolute derivatives are
/// averaged over the seeds with a nonzero violation and divided by the last
/// layer's value.
pub fn layer_sensitivity(
    hidden: &[usize],
    ds: &Dataset,
    bounds: &GenBounds,
    bx: &InputBox,
    seeds: &[u64],
    config: &TrainConfig,
) -> Result<SensitivityReport, TrainError> {
    let n_layers = hidden.len() + 1;
    let mut raw = vec![0.0; n_layers];
    let mut used = Vec::new();
    for &seed in seeds {
        let cfg = TrainConfig {
            seed,
            ..config.clone()
        };
        let (p, _) = train_standard(ds, hidden, &cfg)?;
        let cert = solve_worst_case_with(&p, bx, bounds, &verify_options(&cfg))?;
        if cert.v_g <= 0.0 {
            continue;
        }
        let g = wc_gradient(&p, &cert, false)?;
        for (r, m) in raw.iter_mut().zip(layer_means(&g)) {
            *r += m;
        }
        used.push(seed);
    }
    if used.is_empty() {
        return Err(TrainError::NoViolation);
    }
    raw.iter_mut().for_each(|r| *r /= used.len() as f64);
    let last = raw[n_layers - 1];
    if last <= 0.0 {
        return Err(TrainError::NoViolation);
    }
    Ok(SensitivityReport {
        normalized: raw.iter().map(|r| r / last).collect(),
        raw,
        seeds_used: used,
    })
}
