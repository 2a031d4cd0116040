//! Power-system data model, PTDF, DC-OPF dispatch and dataset generation.

mod dataset;
mod dcopf;
mod model;
mod ptdf;
mod sampling;

pub use dataset::{generate_dataset, generate_dataset_in_box, load_dataset, save_dataset, Dataset, Scaler, Split};
pub use dcopf::{solve_dcopf, DispatchSolution, DispatchStatus};
pub use model::{DemandBox, Generator, GridModel, Line, Load};
pub use ptdf::{compute_ptdf, Ptdf};
pub use sampling::{sample_box_lhs, sample_demands_lhs};

use thiserror::Error;

use crate::optcore::OptError;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("network is singular (disconnected or zero susceptance)")]
    SingularNetwork,
    #[error("demand vector has {got} entries, grid has {expected} loads")]
    DemandLength { expected: usize, got: usize },
    #[error("only {feasible} feasible samples after {attempts} attempts (wanted {wanted})")]
    TooManyInfeasible {
        wanted: usize,
        feasible: usize,
        attempts: usize,
    },
    #[error("dataset schema error at row {row}, column {column}: {message}")]
    DatasetSchema {
        row: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
