use serde::{Deserialize, Serialize};

use crate::mlp::TrainConfig;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// L0 (MAE) on the training split after the epoch's updates.
    pub train_loss: f64,
    pub val_mae: f64,
    /// Worst-case violation of the parameters the epoch started from, when
    /// the verifier ran.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub mode: String,
    pub records: Vec<EpochRecord>,
    pub final_checksum: String,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub mode: String,
    pub epochs: usize,
    pub final_train_loss: f64,
    pub final_val_mae: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub last_v_g: Option<f64>,
    pub final_checksum: String,
    pub config: TrainConfig,
}

impl TrainReport {
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(mode: &str, text: &str, summary: &TrainSummary) -> Result<Self, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            mode: mode.into(),
            records,
            final_checksum: summary.final_checksum.clone(),
            config: summary.config.clone(),
        })
    }

    pub fn summary(&self) -> TrainSummary {
        let last = self.records.last();
        TrainSummary {
            mode: self.mode.clone(),
            epochs: self.records.len(),
            final_train_loss: last.map_or(f64::NAN, |r| r.train_loss),
            final_val_mae: last.map_or(f64::NAN, |r| r.val_mae),
            last_v_g: self.records.iter().rev().find_map(|r| r.v_g),
            final_checksum: self.final_checksum.clone(),
            config: self.config.clone(),
        }
    }

    /// Same report with every wall-time field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.records.iter_mut().for_each(|e| e.wall_time_s = 0.0);
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// Mean absolute derivative of the worst-case violation per affine layer,
    /// divided by the value of the last layer.
    pub normalized: Vec<f64>,
    /// Unnormalized per-layer means.
    pub raw: Vec<f64>,
    /// Seeds with a nonzero violation that entered the average.
    pub seeds_used: Vec<u64>,
}

impl SensitivityReport {
    pub fn n_seeds(&self) -> usize {
        self.seeds_used.len()
    }
}
