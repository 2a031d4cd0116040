use serde::{Deserialize, Serialize};

use super::{backprop_output, forward, Batch, MlpError, MlpParams};

/// Diagonal Fisher values and the parameters they were taken at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherDiag {
    pub values: MlpParams,
    pub anchor: MlpParams,
}

impl FisherDiag {
    pub fn check(&self, params: &MlpParams) -> Result<(), MlpError> {
        if self.values.same_shape(params) && self.anchor.same_shape(params) {
            Ok(())
        } else {
            Err(MlpError::ShapeMismatch(format!(
                "fisher for {:?}, params {:?}",
                self.values.layer_dims, params.layer_dims
            )))
        }
    }
}

/// Empirical Fisher diagonal: mean over samples of the squared per-sample
/// gradient of `0.5 * |prediction - target|^2`. The anchor is `params`.
pub fn fisher_diag(params: &MlpParams, train: &Batch) -> FisherDiag {
    assert!(!train.is_empty(), "empty training split");
    let mut acc = params.zeros_like();
    let mut g = params.zeros_like();
    for (x, y) in train.inputs.iter().zip(&train.targets) {
        let out = forward(params, x).output;
        let resid: Vec<f64> = out.iter().zip(y).map(|(p, t)| p - t).collect();
        g.iter_mut().for_each(|v| *v = 0.0);
        backprop_output(params, x, None, &resid, &mut g);
        for (a, gi) in acc.iter_mut().zip(g.iter()) {
            *a += gi * gi;
        }
    }
    acc.scale(1.0 / train.len() as f64);
    FisherDiag {
        values: acc,
        anchor: params.clone(),
    }
}
