use std::time::Instant;

use super::train::{gap_warning, splits, verify_options};
use super::{EpochRecord, TrainError, TrainReport};
use crate::grid::Dataset;
use crate::mlp::{fisher_diag, loss_mae, FisherDiag, GenBounds, MlpParams, TrainConfig};
use crate::verifier::{solve_worst_case_with, wc_gradient, InputBox};

/// Minimizer of `<g, t> + lambda * sum F (t - anchor)^2 + |t - theta|^2 / (2 alpha)`
/// written into `theta`, entry by entry. With `last_layer_only` only the
/// output map moves.
fn proximal_step(theta: &mut MlpParams, g: &MlpParams, fisher: &FisherDiag, lambda: f64, alpha: f64, last_layer_only: bool) {
    let n = theta.n_layers();
    let skip: usize = if last_layer_only {
        (0..n - 1).map(|k| theta.layer_iter(k).count()).sum()
    } else {
        0
    };
    for (i, (t, (gi, (f, a)))) in theta
        .iter_mut()
        .zip(g.iter().zip(fisher.values.iter().zip(fisher.anchor.iter())))
        .enumerate()
    {
        if i < skip {
            continue;
        }
        let k = 2.0 * alpha * lambda * f;
        *t = (*t - alpha * gi + k * a) / (1.0 + k);
    }
}

/// Post-training phase: repeatedly certify the worst case and move the
/// parameters against its envelope gradient while an EWC anchor (Fisher
/// diagonal on the training split, taken at the incoming parameters) holds
/// them near the original fit. Record 0 describes the incoming model; record
/// `i` the model after update `i`. Stops when the violation reaches zero, the
/// iteration budget is spent, or an update would push validation MAE beyond
/// `(1 + early_stop_rel)` times its starting value (that update is discarded).
pub fn finetune_sequential(
    params: &MlpParams,
    ds: &Dataset,
    bounds: &GenBounds,
    bx: &InputBox,
    config: &TrainConfig,
) -> Result<(MlpParams, TrainReport), TrainError> {
    config.validate()?;
    let (train, val) = splits(ds)?;
    let fisher = fisher_diag(params, &train);
    let opts = verify_options(config);
    let guard = loss_mae(params, &val) * (1.0 + config.early_stop_rel);

    let mut p = params.clone();
    let start = Instant::now();
    let mut cert = solve_worst_case_with(&p, bx, bounds, &opts)?;
    let mut records = vec![EpochRecord {
        epoch: 0,
        train_loss: loss_mae(&p, &train),
        val_mae: loss_mae(&p, &val),
        v_g: Some(cert.v_g),
        warning: gap_warning(&cert),
        wall_time_s: start.elapsed().as_secs_f64(),
    }];

    for it in 1..=config.finetune_iterations {
        if cert.v_g <= 0.0 {
            break;
        }
        let start = Instant::now();
        let mut g = wc_gradient(&p, &cert, config.last_layer_only)?;
        g.scale(config.lambda_wc);
        let mut next = p.clone();
        proximal_step(&mut next, &g, &fisher, config.lambda_ewc, config.finetune_alpha, config.last_layer_only);
        if !next.is_finite() {
            return Err(TrainError::Divergence(it));
        }
        let val_mae = loss_mae(&next, &val);
        if val_mae > guard {
            let last = records.last_mut().expect("initial record");
            last.warning = Some(format!("early stop: validation MAE {val_mae} would exceed {guard}"));
            break;
        }
        p = next;
        cert = solve_worst_case_with(&p, bx, bounds, &opts)?;
        records.push(EpochRecord {
            epoch: it,
            train_loss: loss_mae(&p, &train),
            val_mae,
            v_g: Some(cert.v_g),
            warning: gap_warning(&cert),
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let report = TrainReport {
        mode: "finetune".into(),
        records,
        final_checksum: p.checksum(),
        config: config.clone(),
    };
    Ok((p, report))
}
