use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{layer_dims, EpochRecord, TrainError, TrainReport};
use crate::grid::{Dataset, Split};
use crate::mlp::{
    adam_step, gradient, init_params, loss_mae, AdamState, Batch, GenBounds, LossSpec, MlpError, MlpParams,
    TrainConfig,
};
use crate::verifier::{solve_worst_case_with, wc_gradient, InputBox, VerifyOptions, WorstCaseCert};

const SHUFFLE_SALT: u64 = 0x0BA7_C4E5;

enum Extra<'a> {
    Plain,
    Gen(&'a GenBounds),
    Wc { bounds: &'a GenBounds, bx: &'a InputBox },
}

pub(crate) fn splits(ds: &Dataset) -> Result<(Batch, Batch), TrainError> {
    let train = ds.batch(Split::Train);
    let val = ds.batch(Split::Val);
    if train.is_empty() {
        return Err(TrainError::EmptySplit("train"));
    }
    if val.is_empty() {
        return Err(TrainError::EmptySplit("val"));
    }
    Ok((train, val))
}

pub(crate) fn verify_options(config: &TrainConfig) -> VerifyOptions {
    VerifyOptions {
        node_limit: config.node_limit,
        ..VerifyOptions::default()
    }
}

pub(crate) fn gap_warning(cert: &WorstCaseCert) -> Option<String> {
    (!cert.is_certified()).then(|| format!("node limit reached, gap {}", cert.gap()))
}

/// Minimizes L0 with Adam.
pub fn train_standard(ds: &Dataset, hidden: &[usize], config: &TrainConfig) -> Result<(MlpParams, TrainReport), TrainError> {
    run(ds, hidden, config, Extra::Plain, "nn")
}

/// Minimizes L0 plus the squared-hinge generator-limit penalty.
pub fn train_gennn(
    ds: &Dataset,
    hidden: &[usize],
    bounds: &GenBounds,
    config: &TrainConfig,
) -> Result<(MlpParams, TrainReport), TrainError> {
    if config.lambda_g <= 0.0 {
        return Err(MlpError::Config("lambda_g must be > 0 for penalty training".into()).into());
    }
    run(ds, hidden, config, Extra::Gen(bounds), "gennn")
}

/// Warm-up on L0, then every `wc_every` epochs solve the worst-case program at
/// the current parameters and add `lambda_wc` times its envelope gradient to
/// every update. Between solves the last certificate's witness and pattern
/// are reused.
pub fn train_wcnn(
    ds: &Dataset,
    bounds: &GenBounds,
    bx: &InputBox,
    hidden: &[usize],
    config: &TrainConfig,
) -> Result<(MlpParams, TrainReport), TrainError> {
    run(ds, hidden, config, Extra::Wc { bounds, bx }, "wcnn")
}

fn run(
    ds: &Dataset,
    hidden: &[usize],
    config: &TrainConfig,
    extra: Extra<'_>,
    mode: &str,
) -> Result<(MlpParams, TrainReport), TrainError> {
    config.validate()?;
    let (train, val) = splits(ds)?;
    let dims = layer_dims(ds.n_inputs(), hidden, ds.n_outputs());
    let mut p = init_params(&dims, config.seed)?;
    let mut adam = AdamState::new(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SHUFFLE_SALT);
    let n = train.len();
    let bs = if config.batch_size == 0 || config.batch_size >= n {
        n
    } else {
        config.batch_size
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut cert: Option<WorstCaseCert> = None;
    let mut records = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let start = Instant::now();
        let mut v_g = None;
        let mut warning = None;
        if let Extra::Wc { bounds, bx } = extra {
            let due = config.lambda_wc > 0.0 && epoch > config.warmup && (epoch - config.warmup - 1).is_multiple_of(config.wc_every);
            if due {
                let c = solve_worst_case_with(&p, bx, bounds, &verify_options(config))?;
                warning = gap_warning(&c);
                v_g = Some(c.v_g);
                cert = Some(c);
            }
        }
        let spec = LossSpec {
            mae: config.lambda0,
            gen_penalty: match extra {
                Extra::Gen(b) => Some((config.lambda_g, b)),
                _ => None,
            },
            ewc: None,
        };
        if bs < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(bs) {
            let selected;
            let batch = if bs == n {
                &train
            } else {
                selected = train.select(chunk);
                &selected
            };
            let mut g = gradient(&p, batch, &spec)?;
            if let Some(c) = cert.as_ref().filter(|c| c.v_g > 0.0) {
                g.axpy(config.lambda_wc, &wc_gradient(&p, c, config.last_layer_only)?);
            }
            adam_step(&mut p, &g, &mut adam, config.alpha);
        }
        let train_loss = loss_mae(&p, &train);
        let val_mae = loss_mae(&p, &val);
        if !(p.is_finite() && train_loss.is_finite() && val_mae.is_finite()) {
            return Err(TrainError::Divergence(epoch));
        }
        records.push(EpochRecord {
            epoch,
            train_loss,
            val_mae,
            v_g,
            warning,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    let report = TrainReport {
        mode: mode.into(),
        records,
        final_checksum: p.checksum(),
        config: config.clone(),
    };
    Ok((p, report))
}
