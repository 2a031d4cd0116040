use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DemandBox, GridModel};
use crate::optcore::DenseMatrix;

/// Latin hypercube sample of the box `[lo, hi]`: for every dimension each of
/// the `n` equal-width strata holds exactly one sample.
pub fn sample_box_lhs<R: Rng>(lo: &[f64], hi: &[f64], n: usize, rng: &mut R) -> DenseMatrix {
    let dims = lo.len();
    let mut out = DenseMatrix::zeros(n, dims);
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..dims {
        strata.shuffle(rng);
        for (i, &k) in strata.iter().enumerate() {
            // keep away from stratum edges so the stratum is recoverable
            // from the value after rounding
            let u: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
            let frac = (k as f64 + u) / n as f64;
            out[(i, d)] = lo[d] + (hi[d] - lo[d]) * frac;
        }
    }
    out
}

/// `n` demand vectors over the 60-100% box of nominal load.
pub fn sample_demands_lhs(grid: &GridModel, n: usize, seed: u64) -> DenseMatrix {
    let (lo, hi) = DemandBox::default().mw_bounds(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_box_lhs(&lo, &hi, n, &mut rng)
}
