//! Worst-case generator-limit violation of a ReLU network over an input box.
//!
//! Each of the `2 * n_out` candidate constraints (output above its upper
//! limit, output below its lower limit) is maximized separately as a big-M
//! mixed-integer program solved by branch-and-bound over the unstable ReLU
//! binaries. A brute-force enumeration of activation patterns is provided as
//! an independent reference for small networks.

mod bounds;
mod brute;
mod fixed;
mod gradient;
mod milp;

pub use bounds::{interval_bounds, PreactBounds};
pub use brute::{brute_force_worst_case, BRUTE_FORCE_MAX_NEURONS};
pub use fixed::{affine_maps, worst_case_fixed_pattern, AffineMap};
pub use gradient::wc_gradient;
pub use milp::{solve_candidate, solve_worst_case, solve_worst_case_with, CandidateResult, VerifyOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlp::{forward, ActivationPattern, GenBounds, MlpError, MlpParams};
use crate::optcore::OptError;

/// Absolute optimality tolerance of the branch-and-bound.
pub const ABS_GAP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("preactivation bounds are not finite")]
    BoundsUnavailable,
    #[error("{0} hidden neurons exceed the brute-force limit")]
    TooLarge(usize),
    #[error("no violation: worst-case gradient is zero")]
    NoViolation,
    #[error("invalid input box: {0}")]
    InvalidBox(String),
    #[error(transparent)]
    Shape(#[from] MlpError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

/// Axis-aligned input domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl InputBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, VerifyError> {
        if lo.len() != hi.len() {
            return Err(VerifyError::InvalidBox(format!("{} lower vs {} upper entries", lo.len(), hi.len())));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(VerifyError::InvalidBox(format!("dimension {i}: [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[0, 1]^n`, the scaled demand box.
    pub fn unit(n: usize) -> Self {
        Self {
            lo: vec![0.0; n],
            hi: vec![1.0; n],
        }
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dims()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// One generator limit. Ordered by generator index, then upper before lower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintId {
    pub generator: usize,
    pub side: Side,
}

impl ConstraintId {
    /// All candidates for `n_out` generators in canonical order.
    pub fn all(n_out: usize) -> Vec<ConstraintId> {
        (0..n_out)
            .flat_map(|g| {
                [Side::Upper, Side::Lower].map(|side| ConstraintId { generator: g, side })
            })
            .collect()
    }

    /// Signed violation of this limit by the output vector (negative when
    /// satisfied with margin).
    pub fn violation(&self, output: &[f64], bounds: &GenBounds) -> f64 {
        let g = self.generator;
        match self.side {
            Side::Upper => output[g] - bounds.upper[g],
            Side::Lower => bounds.lower[g] - output[g],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertStatus {
    Certified,
    GapRemaining { gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseCert {
    /// Largest violation over the box, clipped at zero, in scaled output units.
    pub v_g: f64,
    pub witness_input: Vec<f64>,
    pub pattern: ActivationPattern,
    pub constraint_id: ConstraintId,
    pub status: CertStatus,
    pub nodes_explored: usize,
}

impl WorstCaseCert {
    pub fn gap(&self) -> f64 {
        match self.status {
            CertStatus::Certified => 0.0,
            CertStatus::GapRemaining { gap } => gap,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status == CertStatus::Certified
    }

    /// Violation of the certified constraint recomputed by a forward pass.
    pub fn replay(&self, params: &MlpParams, bounds: &GenBounds) -> f64 {
        let out = forward(params, &self.witness_input).output;
        self.constraint_id.violation(&out, bounds)
    }

    pub fn record(&self, params: &MlpParams) -> CertificateRecord {
        CertificateRecord {
            v_g: self.v_g,
            witness_input: self.witness_input.clone(),
            pattern: self.pattern.to_bits(),
            constraint_id: self.constraint_id,
            status: match self.status {
                CertStatus::Certified => "certified".into(),
                CertStatus::GapRemaining { .. } => "gap_remaining".into(),
            },
            gap: self.gap(),
            nodes_explored: self.nodes_explored,
            model_checksum: params.checksum(),
        }
    }
}

/// Serialized form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub v_g: f64,
    pub witness_input: Vec<f64>,
    pub pattern: Vec<Vec<u8>>,
    pub constraint_id: ConstraintId,
    pub status: String,
    pub gap: f64,
    pub nodes_explored: usize,
    pub model_checksum: String,
}

fn check_inputs(params: &MlpParams, bx: &InputBox, bounds: &GenBounds) -> Result<(), VerifyError> {
    params.check_shape()?;
    if bx.dims() != params.n_inputs() {
        return Err(MlpError::ShapeMismatch(format!("box has {} dims, network {}", bx.dims(), params.n_inputs())).into());
    }
    if bounds.lower.len() != params.n_outputs() || bounds.upper.len() != params.n_outputs() {
        return Err(MlpError::ShapeMismatch(format!(
            "{} generator limits for {} outputs",
            bounds.lower.len(),
            params.n_outputs()
        ))
        .into());
    }
    Ok(())
}

/// Certificate for "no violation anywhere": lower box corner, first candidate.
fn zero_cert(params: &MlpParams, bx: &InputBox, status: CertStatus, nodes: usize) -> WorstCaseCert {
    let witness = bx.lo.clone();
    let pattern = forward(params, &witness).pattern;
    WorstCaseCert {
        v_g: 0.0,
        witness_input: witness,
        pattern,
        constraint_id: ConstraintId {
            generator: 0,
            side: Side::Upper,
        },
        status,
        nodes_explored: nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_candidate_order() {
        let c = ConstraintId::all(2);
        assert_eq!(c.len(), 4);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(c[1], ConstraintId { generator: 0, side: Side::Lower });
    }

    #[test]
    fn box_validation() {
        assert!(InputBox::new(vec![0.0], vec![1.0]).is_ok());
        assert!(InputBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(InputBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(InputBox::new(vec![f64::NAN], vec![1.0]).is_err());
    }
}
