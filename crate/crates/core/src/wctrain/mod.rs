//! Training drivers: plain L0 training, the generator-penalty baseline,
//! worst-case-aware training with an embedded verifier, the sequential EWC
//! fine-tuning phase and the per-layer sensitivity study.

mod report;
mod sensitivity;
mod sequential;
mod train;

pub use report::{EpochRecord, SensitivityReport, TrainReport, TrainSummary};
pub use sensitivity::layer_sensitivity;
pub use sequential::finetune_sequential;
pub use train::{train_gennn, train_standard, train_wcnn};

use thiserror::Error;

use crate::grid::{DemandBox, GridModel, Scaler};
use crate::mlp::{GenBounds, MlpError};
use crate::verifier::{InputBox, VerifyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("training diverged at epoch {0} (non-finite loss or parameters)")]
    Divergence(usize),
    #[error("dataset has no {0} samples")]
    EmptySplit(&'static str),
    #[error("no seed produced a nonzero worst-case violation")]
    NoViolation,
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Generator limits expressed in the network's output units.
pub fn scaled_gen_bounds(grid: &GridModel, output_scaler: &Scaler) -> GenBounds {
    let lo: Vec<f64> = grid.generators.iter().map(|g| g.p_min).collect();
    let hi: Vec<f64> = grid.generators.iter().map(|g| g.p_max).collect();
    GenBounds {
        lower: output_scaler.scale(&lo),
        upper: output_scaler.scale(&hi),
    }
}

/// Demand box expressed in the network's input units.
pub fn scaled_input_box(grid: &GridModel, bx: DemandBox, input_scaler: &Scaler) -> InputBox {
    let (lo, hi) = bx.mw_bounds(grid);
    let (a, b) = (input_scaler.scale(&lo), input_scaler.scale(&hi));
    InputBox {
        lo: a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect(),
        hi: a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
    }
}

/// Layer widths from input width, hidden sizes and output width.
pub fn layer_dims(n_in: usize, hidden: &[usize], n_out: usize) -> Vec<usize> {
    let mut d = vec![n_in];
    d.extend_from_slice(hidden);
    d.push(n_out);
    d
}
