use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fixed::worst_case_fixed_pattern;
use super::{
    check_inputs, interval_bounds, zero_cert, CertStatus, ConstraintId, InputBox, PreactBounds, Side, VerifyError,
    WorstCaseCert, ABS_GAP,
};
use crate::grid::sample_box_lhs;
use crate::mlp::{forward, ActivationPattern, GenBounds, MlpParams};
use crate::optcore::{solve_lp, LpProblem, LpStatus};

const INT_TOL: f64 = 1e-6;
const MAX_CORNER_DIMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Branch-and-bound node budget per candidate constraint.
    pub node_limit: usize,
    /// Latin hypercube points evaluated up front to seed incumbents.
    pub heuristic_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            node_limit: 200_000,
            heuristic_samples: 64,
        }
    }
}

/// Outcome of maximizing one candidate violation.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub constraint_id: ConstraintId,
    /// Best violation found (may be negative).
    pub value: f64,
    pub witness: Vec<f64>,
    pub pattern: ActivationPattern,
    /// Objective of the root LP relaxation.
    pub root_bound: f64,
    /// Proven upper bound on the candidate's optimum when the search stopped.
    pub upper_bound: f64,
    pub nodes: usize,
    pub closed: bool,
}

/// Linear expression over the MILP variables.
#[derive(Clone)]
struct Expr {
    coef: Vec<f64>,
    c: f64,
}

/// Big-M encoding shared by all candidates of one network.
struct Encoding {
    n_in: usize,
    /// (layer, neuron) of each unstable ReLU; its post-activation variable is
    /// `n_in + 2i`, its binary `n_in + 2i + 1`.
    unstable: Vec<(usize, usize)>,
    /// Gate of stable neurons, `None` for unstable ones.
    fixed: Vec<Vec<Option<bool>>>,
    base: LpProblem,
    outputs: Vec<Expr>,
}

impl Encoding {
    fn new(params: &MlpParams, bx: &InputBox, pb: &PreactBounds) -> Self {
        let n_in = params.n_inputs();
        let n_unstable = pb.n_unstable();
        let nv = n_in + 2 * n_unstable;
        let mut base = LpProblem::new(vec![0.0; nv]);
        for i in 0..n_in {
            base.set_bounds(i, bx.lo[i], bx.hi[i]);
        }
        let mut act: Vec<Expr> = (0..n_in)
            .map(|i| {
                let mut coef = vec![0.0; nv];
                coef[i] = 1.0;
                Expr { coef, c: 0.0 }
            })
            .collect();
        let mut unstable = Vec::with_capacity(n_unstable);
        let mut fixed = Vec::new();
        let n = params.n_layers();
        for k in 0..n {
            let w = &params.weights[k];
            let pre: Vec<Expr> = (0..w.rows())
                .map(|j| {
                    let mut e = Expr {
                        coef: vec![0.0; nv],
                        c: params.biases[k][j],
                    };
                    for (a, &wji) in act.iter().zip(w.row(j)) {
                        if wji != 0.0 {
                            for (t, s) in e.coef.iter_mut().zip(&a.coef) {
                                *t += wji * s;
                            }
                            e.c += wji * a.c;
                        }
                    }
                    e
                })
                .collect();
            if k + 1 == n {
                return Self {
                    n_in,
                    unstable,
                    fixed,
                    base,
                    outputs: pre,
                };
            }
            let mut gates = Vec::with_capacity(pre.len());
            act = pre
                .into_iter()
                .enumerate()
                .map(|(j, e)| {
                    let (l, u) = (pb.lower[k][j], pb.upper[k][j]);
                    if u <= 0.0 {
                        gates.push(Some(false));
                        Expr {
                            coef: vec![0.0; nv],
                            c: 0.0,
                        }
                    } else if l >= 0.0 {
                        gates.push(Some(true));
                        e
                    } else {
                        gates.push(None);
                        let zi = n_in + 2 * unstable.len();
                        let yi = zi + 1;
                        unstable.push((k, j));
                        base.set_bounds(zi, 0.0, u);
                        base.set_bounds(yi, 0.0, 1.0);
                        // z >= pre
                        let mut r = e.coef.clone();
                        r[zi] -= 1.0;
                        base.add_ub(&r, -e.c);
                        // z <= pre - l (1 - y)
                        let mut r: Vec<f64> = e.coef.iter().map(|v| -v).collect();
                        r[zi] += 1.0;
                        r[yi] -= l;
                        base.add_ub(&r, e.c - l);
                        // z <= u y
                        let mut r = vec![0.0; nv];
                        r[zi] = 1.0;
                        r[yi] = -u;
                        base.add_ub(&r, 0.0);
                        let mut coef = vec![0.0; nv];
                        coef[zi] = 1.0;
                        Expr { coef, c: 0.0 }
                    }
                })
                .collect();
            fixed.push(gates);
        }
        unreachable!("network has an output layer")
    }

    fn candidate_lp(&self, cid: ConstraintId, bounds: &GenBounds) -> (LpProblem, f64) {
        let g = cid.generator;
        let e = &self.outputs[g];
        let (obj, c) = match cid.side {
            Side::Upper => (e.coef.clone(), e.c - bounds.upper[g]),
            Side::Lower => (e.coef.iter().map(|v| -v).collect(), bounds.lower[g] - e.c),
        };
        let mut lp = self.base.clone();
        lp.objective = obj;
        (lp, c)
    }

    fn y_var(&self, i: usize) -> usize {
        self.n_in + 2 * i + 1
    }

    fn rounded_pattern(&self, x: &[f64]) -> ActivationPattern {
        let mut layers: Vec<Vec<bool>> = self
            .fixed
            .iter()
            .map(|l| l.iter().map(|g| g.unwrap_or(false)).collect())
            .collect();
        for (i, &(k, j)) in self.unstable.iter().enumerate() {
            layers[k][j] = x[self.y_var(i)] >= 0.5;
        }
        ActivationPattern { layers }
    }
}

#[derive(Debug, Clone)]
struct Incumbent {
    value: f64,
    witness: Vec<f64>,
    pattern: ActivationPattern,
}

struct Node {
    bound: f64,
    seq: usize,
    fix: Vec<Option<bool>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Nodes whose bound is at most `at_most` or below `below` are discarded.
#[derive(Debug, Clone, Copy)]
struct Cutoff {
    at_most: f64,
    below: f64,
}

impl Cutoff {
    fn prunes(&self, bound: f64, incumbent: f64) -> bool {
        bound <= self.at_most.max(incumbent) + ABS_GAP || bound < self.below - ABS_GAP
    }
}

struct Context<'a> {
    params: &'a MlpParams,
    bx: &'a InputBox,
    bounds: &'a GenBounds,
    enc: &'a Encoding,
}

impl Context<'_> {
    fn evaluate(&self, x: &[f64], cid: ConstraintId) -> Incumbent {
        let t = forward(self.params, x);
        Incumbent {
            value: cid.violation(&t.output, self.bounds),
            witness: x.to_vec(),
            pattern: t.pattern,
        }
    }

    fn offer(best: &mut Option<Incumbent>, cand: Incumbent) {
        if best.as_ref().is_none_or(|b| cand.value > b.value) {
            *best = Some(cand);
        }
    }

    fn branch_and_bound(
        &self,
        cid: ConstraintId,
        start: Option<Incumbent>,
        cutoff: Cutoff,
        node_limit: usize,
    ) -> Result<(CandidateResult, Option<Incumbent>), VerifyError> {
        let (lp, constant) = self.enc.candidate_lp(cid, self.bounds);
        let n_unstable = self.enc.unstable.len();
        let mut best = start;
        let mut heap = BinaryHeap::new();
        heap.push(Node {
            bound: f64::INFINITY,
            seq: 0,
            fix: vec![None; n_unstable],
        });
        let mut seq = 1;
        let mut nodes = 0;
        let mut root_bound = f64::NEG_INFINITY;
        let inc_value = |b: &Option<Incumbent>| b.as_ref().map_or(f64::NEG_INFINITY, |i| i.value);

        while let Some(node) = heap.pop() {
            if nodes > 0 && cutoff.prunes(node.bound, inc_value(&best)) {
                continue;
            }
            if nodes >= node_limit {
                heap.push(node);
                break;
            }
            nodes += 1;
            let mut p = lp.clone();
            for (i, f) in node.fix.iter().enumerate() {
                if let Some(on) = f {
                    let v = if *on { 1.0 } else { 0.0 };
                    p.set_bounds(self.enc.y_var(i), v, v);
                }
            }
            let sol = solve_lp(&p)?;
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let bound = (sol.objective_value + constant).min(node.bound);
            if nodes == 1 {
                root_bound = bound;
            }
            let x = self.bx.clamp(&sol.x[..self.enc.n_in]);
            Self::offer(&mut best, self.evaluate(&x, cid));
            let rounded = self.enc.rounded_pattern(&sol.x);
            let (v, w) = worst_case_fixed_pattern(self.params, &rounded, self.bx, self.bounds, cid)?;
            if v.is_finite() {
                Self::offer(&mut best, self.evaluate(&w, cid));
            }
            if cutoff.prunes(bound, inc_value(&best)) {
                continue;
            }
            let mut pick: Option<(usize, f64)> = None;
            for i in 0..n_unstable {
                if node.fix[i].is_some() {
                    continue;
                }
                let y = sol.x[self.enc.y_var(i)];
                if (y - y.round()).abs() <= INT_TOL {
                    continue;
                }
                let d = (y - 0.5).abs();
                if pick.is_none_or(|(_, bd)| d < bd) {
                    pick = Some((i, d));
                }
            }
            let Some((i, _)) = pick else {
                continue;
            };
            for on in [false, true] {
                let mut fix = node.fix.clone();
                fix[i] = Some(on);
                heap.push(Node { bound, seq, fix });
                seq += 1;
            }
        }

        let inc = inc_value(&best);
        let open = heap
            .iter()
            .filter(|n| !cutoff.prunes(n.bound, inc))
            .map(|n| n.bound)
            .fold(f64::NEG_INFINITY, f64::max);
        let closed = open == f64::NEG_INFINITY;
        let (value, witness, pattern) = match &best {
            Some(b) => (b.value, b.witness.clone(), b.pattern.clone()),
            None => (f64::NEG_INFINITY, Vec::new(), ActivationPattern::all(self.params, false)),
        };
        let result = CandidateResult {
            constraint_id: cid,
            value,
            witness,
            pattern,
            root_bound,
            upper_bound: if closed { value.max(cutoff.at_most) } else { open },
            nodes,
            closed,
        };
        Ok((result, best))
    }
}

fn sample_points(bx: &InputBox, n_samples: usize) -> Vec<Vec<f64>> {
    let n = bx.dims();
    let mut pts = vec![bx.lo.iter().zip(&bx.hi).map(|(l, h)| 0.5 * (l + h)).collect()];
    if n <= MAX_CORNER_DIMS {
        for mask in 0u32..(1 << n) {
            pts.push(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { bx.hi[i] } else { bx.lo[i] })
                    .collect(),
            );
        }
    }
    if n_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_box_lhs(&bx.lo, &bx.hi, n_samples, &mut rng);
        pts.extend(s.to_rows());
    }
    pts
}

/// Maximizes a single candidate violation exactly (no cross-candidate pruning).
pub fn solve_candidate(
    params: &MlpParams,
    bx: &InputBox,
    bounds: &GenBounds,
    cid: ConstraintId,
    opts: &VerifyOptions,
) -> Result<CandidateResult, VerifyError> {
    check_inputs(params, bx, bounds)?;
    let pb = interval_bounds(params, bx);
    if !pb.is_finite() {
        return Err(VerifyError::BoundsUnavailable);
    }
    let enc = Encoding::new(params, bx, &pb);
    let ctx = Context {
        params,
        bx,
        bounds,
        enc: &enc,
    };
    let cutoff = Cutoff {
        at_most: f64::NEG_INFINITY,
        below: f64::NEG_INFINITY,
    };
    Ok(ctx.branch_and_bound(cid, None, cutoff, opts.node_limit)?.0)
}

pub fn solve_worst_case(params: &MlpParams, bx: &InputBox, bounds: &GenBounds) -> Result<WorstCaseCert, VerifyError> {
    solve_worst_case_with(params, bx, bounds, &VerifyOptions::default())
}

/// Largest generator-limit violation over the box, clipped at zero. Ties are
/// resolved towards the lowest (generator, side) candidate.
pub fn solve_worst_case_with(
    params: &MlpParams,
    bx: &InputBox,
    bounds: &GenBounds,
    opts: &VerifyOptions,
) -> Result<WorstCaseCert, VerifyError> {
    check_inputs(params, bx, bounds)?;
    let pb = interval_bounds(params, bx);
    if !pb.is_finite() {
        return Err(VerifyError::BoundsUnavailable);
    }
    let enc = Encoding::new(params, bx, &pb);
    let ctx = Context {
        params,
        bx,
        bounds,
        enc: &enc,
    };
    let cands = ConstraintId::all(params.n_outputs());

    let mut seeds: Vec<Option<Incumbent>> = vec![None; cands.len()];
    for x in sample_points(bx, opts.heuristic_samples) {
        let t = forward(params, &x);
        for (c, cid) in cands.iter().enumerate() {
            let cand = Incumbent {
                value: cid.violation(&t.output, bounds),
                witness: x.clone(),
                pattern: t.pattern.clone(),
            };
            Context::offer(&mut seeds[c], cand);
        }
    }
    // best seed value among candidates after c
    let mut later = vec![f64::NEG_INFINITY; cands.len()];
    for c in (0..cands.len().saturating_sub(1)).rev() {
        let v = seeds[c + 1].as_ref().map_or(f64::NEG_INFINITY, |s| s.value);
        later[c] = later[c + 1].max(v);
    }

    let mut best: Option<(usize, Incumbent)> = None;
    let mut nodes = 0;
    let mut open_bound = f64::NEG_INFINITY;
    for (c, cid) in cands.iter().enumerate() {
        let done = best.as_ref().map_or(0.0, |(_, b)| b.value).max(0.0);
        let cutoff = Cutoff {
            at_most: done,
            below: later[c],
        };
        let (res, inc) = ctx.branch_and_bound(*cid, seeds[c].take(), cutoff, opts.node_limit)?;
        nodes += res.nodes;
        if !res.closed {
            open_bound = open_bound.max(res.upper_bound);
        }
        if let Some(inc) = inc {
            if inc.value > done && best.as_ref().is_none_or(|(_, b)| inc.value > b.value) {
                best = Some((c, inc));
            }
        }
    }

    let v_g = best.as_ref().map_or(0.0, |(_, b)| b.value);
    let status = if open_bound > v_g + ABS_GAP {
        CertStatus::GapRemaining { gap: open_bound - v_g }
    } else {
        CertStatus::Certified
    };
    Ok(match best {
        Some((c, b)) => WorstCaseCert {
            v_g: b.value,
            witness_input: b.witness,
            pattern: b.pattern,
            constraint_id: cands[c],
            status,
            nodes_explored: nodes,
        },
        None => zero_cert(params, bx, status, nodes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_params;
    use crate::optcore::DenseMatrix;

    fn scalar_net(w: f64, b: f64) -> MlpParams {
        MlpParams::from_parts(vec![DenseMatrix::from_rows(&[vec![w]]).unwrap()], vec![vec![b]]).unwrap()
    }

    #[test]
    fn constant_output_inside_limits() {
        let p = scalar_net(0.0, 0.3);
        let gb = GenBounds {
            lower: vec![0.0],
            upper: vec![1.0],
        };
        let c = solve_worst_case(&p, &InputBox::unit(1), &gb).unwrap();
        assert_eq!(c.v_g, 0.0);
        assert!(c.is_certified());
    }

    #[test]
    fn identity_over_unit_interval() {
        let p = scalar_net(1.0, 0.0);
        let gb = GenBounds {
            lower: vec![0.0],
            upper: vec![0.5],
        };
        let c = solve_worst_case(&p, &InputBox::unit(1), &gb).unwrap();
        assert!((c.v_g - 0.5).abs() < 1e-9);
        assert_eq!(c.witness_input, vec![1.0]);
        assert_eq!(c.constraint_id, ConstraintId { generator: 0, side: Side::Upper });
    }

    #[test]
    fn relu_kink_in_the_interior() {
        // g(d) = relu(d - 0.5) - relu(0.5 - d), i.e. d - 0.5; lower limit 0
        let p = MlpParams::from_parts(
            vec![
                DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(),
                DenseMatrix::from_rows(&[vec![1.0, -1.0]]).unwrap(),
            ],
            vec![vec![-0.5, 0.5], vec![0.0]],
        )
        .unwrap();
        let gb = GenBounds {
            lower: vec![0.0],
            upper: vec![10.0],
        };
        let c = solve_worst_case(&p, &InputBox::unit(1), &gb).unwrap();
        assert!((c.v_g - 0.5).abs() < 1e-9);
        assert_eq!(c.constraint_id.side, Side::Lower);
        assert!((c.replay(&p, &gb) - c.v_g).abs() < 1e-9);
    }

    #[test]
    fn root_relaxation_bounds_candidate() {
        let p = init_params(&[2, 6, 6, 2], 31).unwrap();
        let gb = GenBounds {
            lower: vec![-0.1, -0.1],
            upper: vec![0.1, 0.1],
        };
        for cid in ConstraintId::all(2) {
            let r = solve_candidate(&p, &InputBox::unit(2), &gb, cid, &VerifyOptions::default()).unwrap();
            assert!(r.closed);
            assert!(r.root_bound >= r.value - 1e-9);
        }
    }

    #[test]
    fn node_limit_reports_gap() {
        let p = init_params(&[3, 12, 12, 1], 2).unwrap();
        let gb = GenBounds {
            lower: vec![-0.01],
            upper: vec![0.01],
        };
        let opts = VerifyOptions {
            node_limit: 1,
            heuristic_samples: 0,
        };
        let c = solve_worst_case_with(&p, &InputBox::unit(3), &gb, &opts).unwrap();
        let full = solve_worst_case(&p, &InputBox::unit(3), &gb).unwrap();
        assert!(full.is_certified());
        assert!(c.v_g <= full.v_g + 1e-9);
        if !c.is_certified() {
            assert!(c.gap() > 0.0);
            assert!(c.v_g + c.gap() >= full.v_g - 1e-6);
        }
    }
}
