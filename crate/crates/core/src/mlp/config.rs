use serde::{Deserialize, Serialize};

use super::MlpError;

/// Training hyperparameters. Serialized as a flat JSON object; missing keys
/// take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alpha: f64,
    pub epochs: usize,
    /// Epochs of plain L0 training before the worst-case term switches on.
    pub warmup: usize,
    pub lambda0: f64,
    pub lambda_wc: f64,
    pub lambda_g: f64,
    pub lambda_ewc: f64,
    pub seed: u64,
    /// Restrict the worst-case gradient to the output affine map.
    pub last_layer_only: bool,
    /// 0 means full batch.
    pub batch_size: usize,
    /// Solve the worst-case MILP every `wc_every` epochs.
    pub wc_every: usize,
    /// Sequential phase: maximum number of verify/update iterations.
    pub finetune_iterations: usize,
    /// Sequential phase: gradient step size on the worst-case term.
    pub finetune_alpha: f64,
    /// Sequential phase: stop once validation MAE exceeds its starting value
    /// by this relative amount.
    pub early_stop_rel: f64,
    /// Branch-and-bound node budget per candidate constraint.
    pub node_limit: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            epochs: 1000,
            warmup: 200,
            lambda0: 1.0,
            lambda_wc: 0.1,
            lambda_g: 0.1,
            lambda_ewc: 1.0,
            seed: 0,
            last_layer_only: true,
            batch_size: 0,
            wc_every: 1,
            finetune_iterations: 25,
            finetune_alpha: 3e-3,
            early_stop_rel: 0.1,
            node_limit: 200_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        let bad = |m: &str| Err(MlpError::Config(m.into()));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be finite and >= 0");
        }
        if !(self.finetune_alpha >= 0.0 && self.finetune_alpha.is_finite()) {
            return bad("finetune_alpha must be finite and >= 0");
        }
        if self.warmup > self.epochs {
            return bad("warmup must not exceed epochs");
        }
        for (name, v) in [
            ("lambda0", self.lambda0),
            ("lambda_wc", self.lambda_wc),
            ("lambda_g", self.lambda_g),
            ("lambda_ewc", self.lambda_ewc),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(MlpError::Config(format!("{name} must be finite and >= 0")));
            }
        }
        if self.wc_every == 0 {
            return bad("wc_every must be >= 1");
        }
        if !(self.early_stop_rel >= 0.0) {
            return bad("early_stop_rel must be >= 0");
        }
        if self.node_limit == 0 {
            return bad("node_limit must be >= 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_uses_defaults() {
        let c: TrainConfig = serde_json::from_str(r#"{"epochs": 50, "lambda_wc": 0.5}"#).unwrap();
        assert_eq!(c.epochs, 50);
        assert_eq!(c.lambda_wc, 0.5);
        assert_eq!(c.alpha, 1e-3);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"epoch": 50}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let c = TrainConfig { warmup: 5, epochs: 4, ..Default::default() };
        assert!(c.validate().is_err());
        let c = TrainConfig { lambda_ewc: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
