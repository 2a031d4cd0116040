use serde::{Deserialize, Serialize};

use super::{MlpError, MlpParams};

/// On/off state of every hidden ReLU, grouped by hidden layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActivationPattern {
    pub layers: Vec<Vec<bool>>,
}

impl ActivationPattern {
    pub fn all(params: &MlpParams, active: bool) -> Self {
        Self {
            layers: params.hidden_sizes().iter().map(|&n| vec![active; n]).collect(),
        }
    }

    pub fn n_neurons(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn matches(&self, params: &MlpParams) -> bool {
        self.layers.len() == params.hidden_sizes().len()
            && self
                .layers
                .iter()
                .zip(params.hidden_sizes())
                .all(|(l, &n)| l.len() == n)
    }

    pub fn check(&self, params: &MlpParams) -> Result<(), MlpError> {
        if self.matches(params) {
            Ok(())
        } else {
            Err(MlpError::ShapeMismatch("activation pattern does not match architecture".into()))
        }
    }

    /// Flat neuron order: layer by layer.
    pub fn flat(&self) -> Vec<bool> {
        self.layers.concat()
    }

    pub fn from_flat(params: &MlpParams, bits: &[bool]) -> Self {
        let mut layers = Vec::new();
        let mut at = 0;
        for &n in params.hidden_sizes() {
            layers.push(bits[at..at + n].to_vec());
            at += n;
        }
        Self { layers }
    }

    pub fn to_bits(&self) -> Vec<Vec<u8>> {
        self.layers
            .iter()
            .map(|l| l.iter().map(|&b| u8::from(b)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Hidden-layer preactivations.
    pub preactivations: Vec<Vec<f64>>,
    /// Hidden-layer outputs.
    pub activations: Vec<Vec<f64>>,
    pub pattern: ActivationPattern,
    pub output: Vec<f64>,
}

fn affine(params: &MlpParams, k: usize, x: &[f64]) -> Vec<f64> {
    let w = &params.weights[k];
    w.matvec(x)
        .into_iter()
        .zip(&params.biases[k])
        .map(|(a, b)| a + b)
        .collect()
}

pub fn forward(params: &MlpParams, input: &[f64]) -> ForwardTrace {
    assert_eq!(input.len(), params.n_inputs(), "input width");
    let n = params.n_layers();
    let mut pre = Vec::with_capacity(n - 1);
    let mut act = Vec::with_capacity(n - 1);
    let mut layers = Vec::with_capacity(n - 1);
    let mut z = input.to_vec();
    for k in 0..n - 1 {
        let zh = affine(params, k, &z);
        z = zh.iter().map(|&v| v.max(0.0)).collect();
        layers.push(zh.iter().map(|&v| v > 0.0).collect());
        pre.push(zh);
        act.push(z.clone());
    }
    let output = affine(params, n - 1, &z);
    ForwardTrace {
        preactivations: pre,
        activations: act,
        pattern: ActivationPattern { layers },
        output,
    }
}

/// Forward pass with ReLU gates frozen to `pattern`: active units pass their
/// preactivation through unchanged (even if negative), inactive ones emit 0.
pub fn forward_with_pattern(params: &MlpParams, input: &[f64], pattern: &ActivationPattern) -> ForwardTrace {
    assert!(pattern.matches(params), "pattern shape");
    let n = params.n_layers();
    let mut pre = Vec::with_capacity(n - 1);
    let mut act = Vec::with_capacity(n - 1);
    let mut z = input.to_vec();
    for k in 0..n - 1 {
        let zh = affine(params, k, &z);
        z = zh
            .iter()
            .zip(&pattern.layers[k])
            .map(|(&v, &on)| if on { v } else { 0.0 })
            .collect();
        pre.push(zh);
        act.push(z.clone());
    }
    let output = affine(params, n - 1, &z);
    ForwardTrace {
        preactivations: pre,
        activations: act,
        pattern: pattern.clone(),
        output,
    }
}
