use super::{Side, VerifyError, WorstCaseCert};
use crate::mlp::{backprop_output, MlpParams};

/// Gradient of the certified violation with respect to the parameters, taken
/// at the witness input with the ReLU gates frozen to the certificate's
/// pattern. With `last_layer_only` every layer but the output map is zeroed.
pub fn wc_gradient(params: &MlpParams, cert: &WorstCaseCert, last_layer_only: bool) -> Result<MlpParams, VerifyError> {
    if cert.v_g <= 0.0 {
        return Err(VerifyError::NoViolation);
    }
    cert.pattern.check(params)?;
    let mut d_out = vec![0.0; params.n_outputs()];
    d_out[cert.constraint_id.generator] = match cert.constraint_id.side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let mut g = params.zeros_like();
    backprop_output(params, &cert.witness_input, Some(&cert.pattern), &d_out, &mut g);
    if last_layer_only {
        g.keep_last_layer_only();
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{forward, GenBounds};
    use crate::optcore::DenseMatrix;
    use crate::verifier::{solve_worst_case, InputBox};

    fn one_neuron() -> MlpParams {
        MlpParams::from_parts(
            vec![
                DenseMatrix::from_rows(&[vec![1.0]]).unwrap(),
                DenseMatrix::from_rows(&[vec![2.0]]).unwrap(),
            ],
            vec![vec![0.5], vec![0.0]],
        )
        .unwrap()
    }

    #[test]
    fn output_bias_derivative_is_one() {
        let p = one_neuron();
        let gb = GenBounds {
            lower: vec![0.0],
            upper: vec![1.0],
        };
        let c = solve_worst_case(&p, &InputBox::unit(1), &gb).unwrap();
        assert!((c.v_g - 2.0).abs() < 1e-9);
        let g = wc_gradient(&p, &c, false).unwrap();
        assert_eq!(g.biases[1][0], 1.0);
        assert_eq!(g.weights[1][(0, 0)], 1.5);
        assert_eq!(g.biases[0][0], 2.0);
        assert_eq!(g.weights[0][(0, 0)], 2.0);
        let last = wc_gradient(&p, &c, true).unwrap();
        assert_eq!(last.biases[0][0], 0.0);
        assert_eq!(last.biases[1][0], 1.0);
    }

    #[test]
    fn no_violation_is_an_error() {
        let p = one_neuron();
        let gb = GenBounds {
            lower: vec![-10.0],
            upper: vec![10.0],
        };
        let c = solve_worst_case(&p, &InputBox::unit(1), &gb).unwrap();
        assert_eq!(c.v_g, 0.0);
        assert_eq!(wc_gradient(&p, &c, true), Err(VerifyError::NoViolation));
        assert_eq!(forward(&p, &c.witness_input).output.len(), 1);
    }
}
