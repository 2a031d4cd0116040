//! Dense linear algebra and a bounded-variable primal simplex solver.
//!
//! Everything in here is a pure function of its inputs. The LP solver is used
//! by the DC-OPF dispatch, by the branch-and-bound node relaxations of the
//! verifier and by the fixed-pattern worst-case programs.

mod lp;
mod matrix;

pub use lp::{solve_lp, LpProblem, LpSolution, LpStatus};
pub use matrix::{solve_linear_system, DenseMatrix};

use thiserror::Error;

/// Numerical tolerances shared by every solver in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility of constraint rows.
    pub feas: f64,
    /// Smallest pivot magnitude accepted by LU factorization.
    pub pivot: f64,
    /// Reduced-cost optimality threshold and objective comparisons.
    pub objective: f64,
    /// Tableau entries smaller than this are ignored by the ratio test.
    pub ratio: f64,
}

pub const TOL: Tolerances = Tolerances {
    feas: 1e-7,
    pivot: 1e-12,
    objective: 1e-9,
    ratio: 1e-9,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid bounds for variable {0}")]
    InvalidBounds(usize),
    #[error("simplex exceeded {0} iterations")]
    NumericalBreakdown(usize),
}
