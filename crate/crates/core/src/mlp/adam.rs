use super::MlpParams;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: MlpParams,
    pub v: MlpParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update (descent direction).
pub fn adam_step(params: &mut MlpParams, grads: &MlpParams, state: &mut AdamState, alpha: f64) {
    state.t += 1;
    let c1 = 1.0 - BETA1.powi(state.t as i32);
    let c2 = 1.0 - BETA2.powi(state.t as i32);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        let step = alpha * (*m / c1) / ((*v / c2).sqrt() + EPS);
        if step != 0.0 {
            *p -= step;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_params;

    #[test]
    fn first_step_is_signed_learning_rate() {
        let mut p = init_params(&[2, 3, 1], 1).unwrap();
        let before = p.clone();
        let mut g = p.zeros_like();
        for (i, v) in g.iter_mut().enumerate() {
            *v = if i % 2 == 0 { 0.37 * (i + 1) as f64 } else { -1e-3 * (i + 1) as f64 };
        }
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, 1e-3);
        for ((a, b), gi) in p.iter().zip(before.iter()).zip(g.iter()) {
            let expected = -1e-3 * gi.signum();
            assert!(((a - b) - expected).abs() < 1e-3 * 1e-4, "{} vs {}", a - b, expected);
        }
    }

    #[test]
    fn zero_gradient_and_zero_rate_leave_params() {
        let mut p = init_params(&[2, 3, 1], 2).unwrap();
        let before = p.clone();
        let mut s = AdamState::new(&p);
        let zero = p.zeros_like();
        for _ in 0..5 {
            adam_step(&mut p, &zero, &mut s, 1e-3);
        }
        assert_eq!(p, before);
        let mut g = p.zeros_like();
        g.iter_mut().for_each(|v| *v = 0.5);
        adam_step(&mut p, &g, &mut s, 0.0);
        assert_eq!(p, before);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let run = || {
            let mut p = init_params(&[3, 4, 2], 7).unwrap();
            let mut s = AdamState::new(&p);
            for k in 0..20 {
                let mut g = p.clone();
                g.scale((k as f64).sin());
                adam_step(&mut p, &g, &mut s, 0.01);
            }
            p
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
