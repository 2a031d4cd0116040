use super::{forward, Batch, FisherDiag, GenBounds, MlpError, MlpParams};

/// Mean absolute error over samples and output dimensions.
pub fn loss_mae(params: &MlpParams, batch: &Batch) -> f64 {
    assert!(!batch.is_empty(), "empty batch");
    let n_out = params.n_outputs() as f64;
    let total: f64 = batch
        .inputs
        .iter()
        .zip(&batch.targets)
        .map(|(x, y)| {
            forward(params, x)
                .output
                .iter()
                .zip(y)
                .map(|(p, t)| (p - t).abs())
                .sum::<f64>()
        })
        .sum();
    total / (batch.len() as f64 * n_out)
}

/// Squared hinge on generator limits, summed over outputs and averaged over
/// samples.
pub fn loss_gen_penalty(params: &MlpParams, batch: &Batch, bounds: &GenBounds) -> f64 {
    assert!(!batch.is_empty(), "empty batch");
    let total: f64 = batch
        .inputs
        .iter()
        .map(|x| {
            forward(params, x)
                .output
                .iter()
                .enumerate()
                .map(|(g, &p)| {
                    let over = (p - bounds.upper[g]).max(0.0);
                    let under = (bounds.lower[g] - p).max(0.0);
                    over * over + under * under
                })
                .sum::<f64>()
        })
        .sum();
    total / batch.len() as f64
}

/// `sum_i F_i (theta_i - anchor_i)^2`; the EWC weight is applied by callers.
pub fn loss_ewc(params: &MlpParams, fisher: &FisherDiag) -> Result<f64, MlpError> {
    fisher.check(params)?;
    Ok(params
        .iter()
        .zip(fisher.values.iter())
        .zip(fisher.anchor.iter())
        .map(|((p, f), a)| f * (p - a) * (p - a))
        .sum())
}
