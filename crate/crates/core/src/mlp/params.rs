use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::MlpError;
use crate::optcore::DenseMatrix;

/// Weights and biases of every affine map. `weights[k]` maps layer `k` to
/// layer `k + 1` and has shape `layer_dims[k + 1] x layer_dims[k]`.
///
/// The same struct doubles as the container for gradients, Adam moments and
/// Fisher values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<DenseMatrix>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpParams {
    pub fn zeros(layer_dims: &[usize]) -> Result<Self, MlpError> {
        validate_dims(layer_dims)?;
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights: layer_dims
                .windows(2)
                .map(|w| DenseMatrix::zeros(w[1], w[0]))
                .collect(),
            biases: layer_dims[1..].iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.layer_dims).expect("dims already validated")
    }

    pub fn from_parts(weights: Vec<DenseMatrix>, biases: Vec<Vec<f64>>) -> Result<Self, MlpError> {
        let mut dims = vec![weights.first().map_or(0, DenseMatrix::cols)];
        dims.extend(weights.iter().map(DenseMatrix::rows));
        validate_dims(&dims)?;
        let p = Self {
            layer_dims: dims,
            weights,
            biases,
        };
        p.check_shape()?;
        Ok(p)
    }

    /// Number of affine maps (hidden layers + 1).
    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn hidden_sizes(&self) -> &[usize] {
        &self.layer_dims[1..self.layer_dims.len() - 1]
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_sizes().iter().sum()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols()).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn check_shape(&self) -> Result<(), MlpError> {
        validate_dims(&self.layer_dims)?;
        let n = self.layer_dims.len() - 1;
        if self.weights.len() != n || self.biases.len() != n {
            return Err(MlpError::ShapeMismatch(format!(
                "{} weight matrices and {} bias vectors for {n} layers",
                self.weights.len(),
                self.biases.len()
            )));
        }
        for k in 0..n {
            let (rows, cols) = (self.layer_dims[k + 1], self.layer_dims[k]);
            if self.weights[k].rows() != rows || self.weights[k].cols() != cols {
                return Err(MlpError::ShapeMismatch(format!(
                    "weights[{k}] is {}x{}, expected {rows}x{cols}",
                    self.weights[k].rows(),
                    self.weights[k].cols()
                )));
            }
            if self.biases[k].len() != rows {
                return Err(MlpError::ShapeMismatch(format!(
                    "biases[{k}] has {} entries, expected {rows}",
                    self.biases[k].len()
                )));
            }
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &MlpParams) -> bool {
        self.layer_dims == other.layer_dims
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    /// All parameters in canonical order: layer by layer, weights (row-major)
    /// then biases.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.as_slice().iter().chain(b.iter()).copied())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.as_mut_slice().iter_mut().chain(b.iter_mut()))
    }

    /// Parameters of affine map `k` (weights then bias).
    pub fn layer_iter(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.weights[k].as_slice().iter().chain(self.biases[k].iter()).copied()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.iter().collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        for (p, v) in self.iter_mut().zip(flat) {
            *p = *v;
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &MlpParams) {
        for (p, q) in self.iter_mut().zip(other.iter()) {
            *p += a * q;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for p in self.iter_mut() {
            *p *= a;
        }
    }

    pub fn dot(&self, other: &MlpParams) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    /// Zeroes every affine map except the last one.
    pub fn keep_last_layer_only(&mut self) {
        let n = self.n_layers();
        for k in 0..n - 1 {
            self.weights[k].as_mut_slice().fill(0.0);
            self.biases[k].fill(0.0);
        }
    }

    /// Hex SHA-256 of the architecture and the little-endian parameter bits.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.layer_dims {
            h.update((*d as u64).to_le_bytes());
        }
        for v in self.iter() {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn validate_dims(dims: &[usize]) -> Result<(), MlpError> {
    if dims.len() < 2 {
        return Err(MlpError::Architecture("need at least input and output layers".into()));
    }
    if dims.contains(&0) {
        return Err(MlpError::Architecture(format!("zero-width layer in {dims:?}")));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(layer_dims: &[usize], seed: u64) -> Result<MlpParams, MlpError> {
    let mut p = MlpParams::zeros(layer_dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for w in &mut p.weights {
        let limit = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
        for v in w.as_mut_slice() {
            *v = rng.gen_range(-limit..limit);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_in_range() {
        let dims = [3, 8, 5, 2];
        let a = init_params(&dims, 42).unwrap();
        let b = init_params(&dims, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_params(&dims, 43).unwrap());
        assert!(a.biases.iter().flatten().all(|&v| v == 0.0));
        for w in &a.weights {
            let limit = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
            assert!(w.as_slice().iter().all(|v| v.abs() <= limit));
        }
        assert_eq!(a.n_params(), 3 * 8 + 8 + 8 * 5 + 5 + 5 * 2 + 2);
    }

    #[test]
    fn bad_architectures() {
        assert!(init_params(&[3], 0).is_err());
        assert!(init_params(&[3, 0, 1], 0).is_err());
    }

    #[test]
    fn flat_round_trip_and_checksum() {
        let a = init_params(&[2, 3, 1], 1).unwrap();
        let mut b = a.zeros_like();
        b.set_flat(&a.to_flat());
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
        b.biases[1][0] = 1e-300;
        assert_ne!(a.checksum(), b.checksum());
    }

    #[test]
    fn last_layer_mask() {
        let mut a = init_params(&[2, 3, 3, 1], 5).unwrap();
        let last = a.weights[2].clone();
        a.keep_last_layer_only();
        assert!(a.weights[0].as_slice().iter().all(|&v| v == 0.0));
        assert!(a.weights[1].as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(a.weights[2], last);
    }
}
