use serde::{Deserialize, Serialize};

use super::InputBox;
use crate::mlp::MlpParams;

/// Interval bounds on every hidden preactivation, grouped by hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreactBounds {
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

impl PreactBounds {
    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).flatten().all(|v| v.is_finite())
    }

    pub fn n_unstable(&self) -> usize {
        self.lower
            .iter()
            .flatten()
            .zip(self.upper.iter().flatten())
            .filter(|(l, u)| **l < 0.0 && **u > 0.0)
            .count()
    }
}

/// Layer-by-layer interval arithmetic over the box.
pub fn interval_bounds(params: &MlpParams, bx: &InputBox) -> PreactBounds {
    let mut lo = bx.lo.clone();
    let mut hi = bx.hi.clone();
    let mut out = PreactBounds {
        lower: Vec::new(),
        upper: Vec::new(),
    };
    for k in 0..params.n_layers() - 1 {
        let w = &params.weights[k];
        let mut zl = Vec::with_capacity(w.rows());
        let mut zu = Vec::with_capacity(w.rows());
        for (j, b) in params.biases[k].iter().enumerate() {
            let (mut l, mut u) = (*b, *b);
            for (i, &wij) in w.row(j).iter().enumerate() {
                let (a, c) = (wij * lo[i], wij * hi[i]);
                l += a.min(c);
                u += a.max(c);
            }
            zl.push(l);
            zu.push(u);
        }
        lo = zl.iter().map(|v| v.max(0.0)).collect();
        hi = zu.iter().map(|v| v.max(0.0)).collect();
        out.lower.push(zl);
        out.upper.push(zu);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{forward, init_params};
    use crate::optcore::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn monotone_affine_neuron() {
        let p = MlpParams::from_parts(
            vec![
                DenseMatrix::from_rows(&[vec![2.0]]).unwrap(),
                DenseMatrix::from_rows(&[vec![1.0]]).unwrap(),
            ],
            vec![vec![-1.0], vec![0.0]],
        )
        .unwrap();
        let b = interval_bounds(&p, &InputBox::unit(1));
        assert_eq!(b.lower, vec![vec![-1.0]]);
        assert_eq!(b.upper, vec![vec![1.0]]);
    }

    #[test]
    fn zero_weights_give_bias() {
        let mut p = MlpParams::zeros(&[3, 2, 1]).unwrap();
        p.biases[0] = vec![0.5, -2.0];
        let b = interval_bounds(&p, &InputBox::unit(3));
        assert_eq!(b.lower[0], vec![0.5, -2.0]);
        assert_eq!(b.upper[0], vec![0.5, -2.0]);
    }

    #[test]
    fn sampled_preactivations_stay_inside() {
        let mut p = init_params(&[3, 6, 5, 2], 21).unwrap();
        p.biases[0] = vec![0.3, -0.2, 0.1, -0.4, 0.0, 0.25];
        let bx = InputBox::new(vec![-1.0, 0.0, 0.5], vec![1.0, 2.0, 0.75]).unwrap();
        let b = interval_bounds(&p, &bx);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..3).map(|i| rng.gen_range(bx.lo[i]..=bx.hi[i])).collect();
            let t = forward(&p, &x);
            for (k, layer) in t.preactivations.iter().enumerate() {
                for (j, z) in layer.iter().enumerate() {
                    assert!(b.lower[k][j] <= *z + 1e-12 && *z <= b.upper[k][j] + 1e-12);
                }
            }
        }
    }
}
