use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MlpError, MlpParams, TrainConfig};
use crate::grid::Scaler;
use crate::optcore::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub config: TrainConfig,
}

/// On-disk model: parameters as nested arrays plus the scalers needed to map
/// MW quantities in and out of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCheckpoint {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub input_scaler: Scaler,
    pub output_scaler: Scaler,
    pub meta: CheckpointMeta,
}

impl ModelCheckpoint {
    pub fn new(params: &MlpParams, input_scaler: Scaler, output_scaler: Scaler, config: &TrainConfig) -> Self {
        Self {
            layer_dims: params.layer_dims.clone(),
            weights: params.weights.iter().map(DenseMatrix::to_rows).collect(),
            biases: params.biases.clone(),
            input_scaler,
            output_scaler,
            meta: CheckpointMeta {
                seed: config.seed,
                config: config.clone(),
            },
        }
    }

    pub fn params(&self) -> Result<MlpParams, MlpError> {
        let weights = self
            .weights
            .iter()
            .map(|w| {
                if w.is_empty() {
                    return Err(MlpError::ShapeMismatch("empty weight matrix".into()));
                }
                DenseMatrix::from_rows(w).map_err(|e| MlpError::ShapeMismatch(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = MlpParams::from_parts(weights, self.biases.clone())?;
        if p.layer_dims != self.layer_dims {
            return Err(MlpError::ShapeMismatch(format!(
                "layer_dims {:?} disagree with weights {:?}",
                self.layer_dims, p.layer_dims
            )));
        }
        if self.input_scaler.dims() != p.n_inputs() || self.output_scaler.dims() != p.n_outputs() {
            return Err(MlpError::ShapeMismatch("scaler dimensions".into()));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_params;

    #[test]
    fn exact_round_trip() {
        let mut p = init_params(&[3, 5, 2], 17).unwrap();
        p.biases[0][1] = 1.0 / 3.0;
        p.biases[1][0] = -2.2250738585072014e-308;
        let ck = ModelCheckpoint::new(&p, Scaler::identity(3), Scaler::identity(2), &TrainConfig::default());
        let back = ModelCheckpoint::from_json(&ck.to_json()).unwrap();
        let q = back.params().unwrap();
        assert!(p.iter().zip(q.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back, ck);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let p = init_params(&[2, 3, 1], 1).unwrap();
        let mut ck = ModelCheckpoint::new(&p, Scaler::identity(2), Scaler::identity(1), &TrainConfig::default());
        ck.layer_dims = vec![2, 4, 1];
        assert!(ck.params().is_err());
    }
}
