use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every hyperparameter of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub learning_rate: f64,
    /// Events per parameter update.
    pub batch_size: usize,
    /// Negative samples per event.
    pub negatives: usize,
    pub communities: usize,
    pub epochs: usize,
    pub history_cap: usize,
    pub seed: u64,
    /// Divisor applied to elapsed times before time encoding. `None` picks
    /// the median positive gap between consecutive events.
    pub time_scale: Option<f64>,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            learning_rate: 0.001,
            batch_size: 128,
            negatives: 10,
            communities: 10,
            epochs: 10,
            history_cap: 10,
            seed: 42,
            time_scale: None,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 || !self.dim.is_multiple_of(2) {
            return bad(format!("dim must be even, got {}", self.dim));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1".into());
        }
        if self.communities == 0 {
            return bad("communities must be at least 1".into());
        }
        if self.history_cap == 0 {
            return bad("history cap must be at least 1".into());
        }
        if let Some(s) = self.time_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("time scale must be positive, got {s}"));
            }
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must lie in [0, 1)".into());
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return bad("adam eps must be positive".into());
        }
        Ok(())
    }
}
