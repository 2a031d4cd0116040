//! ReLU multilayer perceptron: parameters, forward/backward passes, loss terms,
//! Adam and the empirical Fisher diagonal used by EWC.
//!
//! Hidden layers use ReLU, the output layer is affine. All derivatives are
//! taken with the subgradient convention `d relu(0) = 0` and `d |0| = 0`.

mod adam;
mod checkpoint;
mod config;
mod fisher;
mod forward;
mod grad;
mod loss;
mod params;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{CheckpointMeta, ModelCheckpoint};
pub use config::TrainConfig;
pub use fisher::{fisher_diag, FisherDiag};
pub use forward::{forward, forward_with_pattern, ActivationPattern, ForwardTrace};
pub use grad::{backprop_output, gradient, LossSpec};
pub use loss::{loss_ewc, loss_gen_penalty, loss_mae};
pub use params::{init_params, MlpParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Scaled samples, one row per sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Batch {
        Batch {
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }
}

/// Generator limits in scaled output units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GenBounds {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}
