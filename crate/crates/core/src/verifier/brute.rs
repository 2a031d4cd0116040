use super::fixed::{box_lp, push_consistency, violation_objective, AffineMap};
use super::{check_inputs, zero_cert, CertStatus, ConstraintId, InputBox, VerifyError, WorstCaseCert};
use crate::mlp::{ActivationPattern, GenBounds, MlpParams};
use crate::optcore::{solve_lp, LpProblem, LpStatus};

pub const BRUTE_FORCE_MAX_NEURONS: usize = 16;

struct Best {
    value: f64,
    witness: Vec<f64>,
    pattern: Vec<Vec<bool>>,
}

struct Search<'a> {
    params: &'a MlpParams,
    bx: &'a InputBox,
    bounds: &'a GenBounds,
    candidates: Vec<ConstraintId>,
    best: Vec<Option<Best>>,
    leaves: usize,
}

impl Search<'_> {
    fn feasible(&self, lp: &LpProblem) -> Result<bool, VerifyError> {
        Ok(solve_lp(lp)?.status == LpStatus::Optimal)
    }

    /// Fixes neuron `j` of hidden layer `k`, whose preactivation map is `pre`.
    fn descend(
        &mut self,
        k: usize,
        pre: &AffineMap,
        done: &mut Vec<Vec<bool>>,
        bits: &mut Vec<bool>,
        lp: &LpProblem,
    ) -> Result<(), VerifyError> {
        let j = bits.len();
        let width = pre.c.len();
        let hidden = self.params.n_layers() - 1;
        if k == hidden {
            return self.leaf(pre, done, lp);
        }
        if j == width {
            let next = pre.masked(bits).then(&self.params.weights[k + 1], &self.params.biases[k + 1]);
            done.push(std::mem::take(bits));
            let r = self.descend(k + 1, &next, done, &mut Vec::new(), lp);
            *bits = done.pop().unwrap();
            return r;
        }
        for on in [false, true] {
            let mut child = lp.clone();
            push_consistency(&mut child, pre, j, on);
            if !self.feasible(&child)? {
                continue;
            }
            bits.push(on);
            let r = self.descend(k, pre, done, bits, &child);
            bits.pop();
            r?;
        }
        Ok(())
    }

    fn leaf(&mut self, out: &AffineMap, done: &[Vec<bool>], lp: &LpProblem) -> Result<(), VerifyError> {
        self.leaves += 1;
        for (c, cid) in self.candidates.iter().enumerate() {
            let (obj, constant) = violation_objective(out, *cid, self.bounds);
            let mut p = lp.clone();
            p.objective = obj;
            let sol = solve_lp(&p)?;
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let value = sol.objective_value + constant;
            if self.best[c].as_ref().is_none_or(|b| value > b.value) {
                self.best[c] = Some(Best {
                    value,
                    witness: self.bx.clamp(&sol.x),
                    pattern: done.to_vec(),
                });
            }
        }
        Ok(())
    }
}

/// Reference solver: enumerates every feasible activation pattern (pruning
/// empty regions early) and solves one LP per pattern and candidate.
pub fn brute_force_worst_case(params: &MlpParams, bx: &InputBox, bounds: &GenBounds) -> Result<WorstCaseCert, VerifyError> {
    check_inputs(params, bx, bounds)?;
    let h = params.n_hidden();
    if h > BRUTE_FORCE_MAX_NEURONS {
        return Err(VerifyError::TooLarge(h));
    }
    let n_out = params.n_outputs();
    let mut s = Search {
        params,
        bx,
        bounds,
        candidates: ConstraintId::all(n_out),
        best: (0..2 * n_out).map(|_| None).collect(),
        leaves: 0,
    };
    let root = box_lp(vec![0.0; params.n_inputs()], bx);
    let pre0 = AffineMap::start(params.n_inputs()).then(&params.weights[0], &params.biases[0]);
    s.descend(0, &pre0, &mut Vec::new(), &mut Vec::new(), &root)?;

    let mut top: Option<(usize, &Best)> = None;
    for (c, b) in s.best.iter().enumerate() {
        if let Some(b) = b {
            if top.is_none_or(|(_, t)| b.value > t.value) {
                top = Some((c, b));
            }
        }
    }
    match top {
        Some((c, b)) if b.value > 0.0 => Ok(WorstCaseCert {
            v_g: b.value,
            witness_input: b.witness.clone(),
            pattern: ActivationPattern {
                layers: b.pattern.clone(),
            },
            constraint_id: s.candidates[c],
            status: CertStatus::Certified,
            nodes_explored: s.leaves,
        }),
        _ => Ok(zero_cert(params, bx, CertStatus::Certified, s.leaves)),
    }
}
