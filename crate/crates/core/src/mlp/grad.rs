use rayon::prelude::*;

use super::{forward, forward_with_pattern, ActivationPattern, Batch, FisherDiag, GenBounds, MlpError, MlpParams};

/// Per-sample work is split into fixed-size chunks and the partial gradients
/// are summed in chunk order, so results do not depend on thread scheduling.
const CHUNK: usize = 64;

/// Nonnegative weights for the composite training loss
/// `mae * L0 + w_g * gen_penalty + w_e * ewc`.
#[derive(Debug, Clone, Copy)]
pub struct LossSpec<'a> {
    pub mae: f64,
    pub gen_penalty: Option<(f64, &'a GenBounds)>,
    pub ewc: Option<(f64, &'a FisherDiag)>,
}

impl<'a> LossSpec<'a> {
    pub fn mae_only() -> Self {
        Self {
            mae: 1.0,
            gen_penalty: None,
            ewc: None,
        }
    }

    pub fn value(&self, params: &MlpParams, batch: &Batch) -> Result<f64, MlpError> {
        let mut v = 0.0;
        if self.mae != 0.0 {
            v += self.mae * super::loss_mae(params, batch);
        }
        if let Some((w, b)) = self.gen_penalty {
            v += w * super::loss_gen_penalty(params, batch, b);
        }
        if let Some((w, f)) = self.ewc {
            v += w * super::loss_ewc(params, f)?;
        }
        Ok(v)
    }
}

/// Accumulates into `grads` the gradient of `<d_out, output(input)>`.
///
/// With `pattern = None` the natural ReLU gates of the input are used,
/// otherwise the gates are frozen to the given pattern.
pub fn backprop_output(
    params: &MlpParams,
    input: &[f64],
    pattern: Option<&ActivationPattern>,
    d_out: &[f64],
    grads: &mut MlpParams,
) {
    let trace = match pattern {
        Some(p) => forward_with_pattern(params, input, p),
        None => forward(params, input),
    };
    backprop_trace(params, input, &trace.activations, &trace.pattern, d_out, grads);
}

fn backprop_trace(
    params: &MlpParams,
    input: &[f64],
    activations: &[Vec<f64>],
    pattern: &ActivationPattern,
    d_out: &[f64],
    grads: &mut MlpParams,
) {
    let n = params.n_layers();
    let mut delta = d_out.to_vec();
    for k in (0..n).rev() {
        let prev: &[f64] = if k == 0 { input } else { &activations[k - 1] };
        let gw = &mut grads.weights[k];
        for (i, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (g, &z) in gw.row_mut(i).iter_mut().zip(prev) {
                *g += d * z;
            }
            grads.biases[k][i] += d;
        }
        if k > 0 {
            let mut back = params.weights[k].tr_matvec(&delta);
            for (b, &on) in back.iter_mut().zip(&pattern.layers[k - 1]) {
                if !on {
                    *b = 0.0;
                }
            }
            delta = back;
        }
    }
}

/// Exact reverse-mode gradient of the composite loss selected by `spec`.
pub fn gradient(params: &MlpParams, batch: &Batch, spec: &LossSpec<'_>) -> Result<MlpParams, MlpError> {
    let n_out = params.n_outputs();
    let n = batch.len();
    let mut total = params.zeros_like();

    if n > 0 && (spec.mae != 0.0 || spec.gen_penalty.is_some()) {
        let mae_w = spec.mae / (n as f64 * n_out as f64);
        let partials: Vec<MlpParams> = batch
            .inputs
            .par_chunks(CHUNK)
            .zip(batch.targets.par_chunks(CHUNK))
            .map(|(xs, ys)| {
                let mut g = params.zeros_like();
                let mut d_out = vec![0.0; n_out];
                for (x, y) in xs.iter().zip(ys) {
                    let trace = forward(params, x);
                    for (j, d) in d_out.iter_mut().enumerate() {
                        let r = trace.output[j] - y[j];
                        *d = mae_w * sign(r);
                        if let Some((w, b)) = spec.gen_penalty {
                            let over = (trace.output[j] - b.upper[j]).max(0.0);
                            let under = (b.lower[j] - trace.output[j]).max(0.0);
                            *d += w / n as f64 * 2.0 * (over - under);
                        }
                    }
                    backprop_trace(params, x, &trace.activations, &trace.pattern, &d_out, &mut g);
                }
                g
            })
            .collect();
        for p in &partials {
            total.axpy(1.0, p);
        }
    }

    if let Some((w, fisher)) = spec.ewc {
        fisher.check(params)?;
        for ((g, (p, f)), a) in total
            .iter_mut()
            .zip(params.iter().zip(fisher.values.iter()))
            .zip(fisher.anchor.iter())
        {
            *g += w * 2.0 * f * (p - a);
        }
    }
    Ok(total)
}

#[inline]
fn sign(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optcore::DenseMatrix;

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let p = crate::mlp::init_params(&[2, 4, 1], 3).unwrap();
        let xs = vec![vec![0.1, 0.9], vec![0.5, 0.5]];
        let ys = xs.iter().map(|x| forward(&p, x).output).collect();
        let g = gradient(&p, &Batch { inputs: xs, targets: ys }, &LossSpec::mae_only()).unwrap();
        assert!(g.iter().all(|v| v == 0.0));
    }

    #[test]
    fn scalar_chain_rule() {
        // g(w) = relu(w * d) followed by identity output; d = 1, w = 2, target 1
        let p = MlpParams::from_parts(
            vec![
                DenseMatrix::from_rows(&[vec![2.0]]).unwrap(),
                DenseMatrix::from_rows(&[vec![1.0]]).unwrap(),
            ],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        let b = Batch {
            inputs: vec![vec![1.0]],
            targets: vec![vec![1.0]],
        };
        let g = gradient(&p, &b, &LossSpec::mae_only()).unwrap();
        assert_eq!(g.weights[0][(0, 0)], 1.0);
        assert_eq!(g.weights[1][(0, 0)], 2.0);
        assert_eq!(g.biases[1][0], 1.0);
    }
}
