use super::{check_inputs, ConstraintId, InputBox, Side, VerifyError};
use crate::mlp::{ActivationPattern, GenBounds, MlpParams};
use crate::optcore::{solve_lp, DenseMatrix, LpProblem, LpStatus};

/// `x -> a x + c` as a function of the network input.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub a: DenseMatrix,
    pub c: Vec<f64>,
}

impl AffineMap {
    fn identity(n: usize) -> Self {
        Self {
            a: DenseMatrix::identity(n),
            c: vec![0.0; n],
        }
    }

    /// `w * self + b`.
    pub(crate) fn then(&self, w: &DenseMatrix, b: &[f64]) -> Self {
        let a = w.matmul(&self.a).expect("conformable layer maps");
        let c = w.matvec(&self.c).iter().zip(b).map(|(x, y)| x + y).collect();
        Self { a, c }
    }

    /// Rows with `on[j] == false` set to zero.
    pub(crate) fn masked(&self, on: &[bool]) -> Self {
        let mut out = self.clone();
        for (j, &keep) in on.iter().enumerate() {
            if !keep {
                out.a.row_mut(j).fill(0.0);
                out.c[j] = 0.0;
            }
        }
        out
    }

    pub(crate) fn start(n_inputs: usize) -> Self {
        Self::identity(n_inputs)
    }
}

/// Preactivation maps of every hidden layer followed by the output map, with
/// the ReLUs replaced by the fixed gates of `pattern`.
pub fn affine_maps(params: &MlpParams, pattern: &ActivationPattern) -> Vec<AffineMap> {
    let n = params.n_layers();
    let mut act = AffineMap::identity(params.n_inputs());
    let mut maps = Vec::with_capacity(n);
    for k in 0..n {
        let pre = act.then(&params.weights[k], &params.biases[k]);
        if k + 1 < n {
            act = pre.masked(&pattern.layers[k]);
        }
        maps.push(pre);
    }
    maps
}

/// Adds `pre_j(x) >= 0` (active) or `pre_j(x) <= 0` (inactive).
pub(crate) fn push_consistency(lp: &mut LpProblem, map: &AffineMap, j: usize, on: bool) {
    let row = map.a.row(j);
    if on {
        lp.add_ge(row, -map.c[j]);
    } else {
        lp.add_ub(row, -map.c[j]);
    }
}

pub(crate) fn box_lp(objective: Vec<f64>, bx: &InputBox) -> LpProblem {
    let mut lp = LpProblem::new(objective);
    for i in 0..bx.dims() {
        lp.set_bounds(i, bx.lo[i], bx.hi[i]);
    }
    lp
}

/// Objective row and constant of one candidate violation, given the output map.
pub(crate) fn violation_objective(out: &AffineMap, cid: ConstraintId, bounds: &GenBounds) -> (Vec<f64>, f64) {
    let g = cid.generator;
    match cid.side {
        Side::Upper => (out.a.row(g).to_vec(), out.c[g] - bounds.upper[g]),
        Side::Lower => (out.a.row(g).iter().map(|v| -v).collect(), bounds.lower[g] - out.c[g]),
    }
}

/// Maximizes one candidate violation over the part of the box where the
/// network's gates agree with `pattern`. Returns `(-inf, [])` when that region
/// is empty.
pub fn worst_case_fixed_pattern(
    params: &MlpParams,
    pattern: &ActivationPattern,
    bx: &InputBox,
    bounds: &GenBounds,
    cid: ConstraintId,
) -> Result<(f64, Vec<f64>), VerifyError> {
    check_inputs(params, bx, bounds)?;
    pattern.check(params)?;
    let maps = affine_maps(params, pattern);
    let (obj, constant) = violation_objective(maps.last().unwrap(), cid, bounds);
    let mut lp = box_lp(obj, bx);
    for (k, on) in pattern.layers.iter().enumerate() {
        for (j, &b) in on.iter().enumerate() {
            push_consistency(&mut lp, &maps[k], j, b);
        }
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective_value + constant, bx.clamp(&sol.x))),
        _ => Ok((f64::NEG_INFINITY, Vec::new())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{forward, forward_with_pattern, init_params};

    #[test]
    fn maps_reproduce_pattern_forward() {
        let p = init_params(&[3, 4, 3, 2], 9).unwrap();
        let x = [0.2, 0.7, 0.4];
        let t = forward(&p, &x);
        let mut pat = t.pattern.clone();
        pat.layers[0][1] = !pat.layers[0][1];
        let tp = forward_with_pattern(&p, &x, &pat);
        let maps = affine_maps(&p, &pat);
        let out = maps[2].a.matvec(&x);
        for (j, v) in out.iter().enumerate() {
            assert!((v + maps[2].c[j] - tp.output[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn own_region_contains_sample() {
        let p = init_params(&[2, 5, 1], 3).unwrap();
        let bx = InputBox::unit(2);
        let gb = GenBounds {
            lower: vec![-0.1],
            upper: vec![0.1],
        };
        let cid = ConstraintId {
            generator: 0,
            side: Side::Upper,
        };
        for x in [[0.1, 0.9], [0.5, 0.5], [1.0, 0.0]] {
            let t = forward(&p, &x);
            let (v, w) = worst_case_fixed_pattern(&p, &t.pattern, &bx, &gb, cid).unwrap();
            assert!(v >= cid.violation(&t.output, &gb) - 1e-9);
            assert!(bx.contains(&w, 0.0));
        }
    }

    #[test]
    fn contradictory_pattern_is_empty() {
        let mut p = init_params(&[2, 3, 1], 4).unwrap();
        p.weights[0].as_mut_slice().iter_mut().for_each(|w| *w = w.abs());
        p.biases[0] = vec![0.5, 0.5, 0.5];
        let pat = ActivationPattern::all(&p, false);
        let gb = GenBounds {
            lower: vec![0.0],
            upper: vec![1.0],
        };
        let cid = ConstraintId {
            generator: 0,
            side: Side::Lower,
        };
        let (v, w) = worst_case_fixed_pattern(&p, &pat, &InputBox::unit(2), &gb, cid).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        assert!(w.is_empty());
    }
}
