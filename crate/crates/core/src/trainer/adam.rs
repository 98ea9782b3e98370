//! Adam with bias correction.
//!
//! Dense tensors share one step counter each; the per-node scalars keep one
//! counter per node so that nodes absent from a batch are left untouched.

use crate::aggregator::AggregatorParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

#[inline]
fn update(cfg: &AdamConfig, lr: f64, step: u64, m: &mut f64, v: &mut f64, p: &mut f64, g: f64) {
    *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
    *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
    let m_hat = *m / (1.0 - cfg.beta1.powf(step as f64));
    let v_hat = *v / (1.0 - cfg.beta2.powf(step as f64));
    *p -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
}

fn check_finite(name: &str, grads: &[f64]) -> Result<()> {
    if grads.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("gradient of {name}")))
    }
}

/// Moments of one dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl Moments {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    pub fn apply(&mut self, cfg: &AdamConfig, lr: f64, name: &str, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::dim("adam tensor", self.m.len(), grads.len()));
        }
        check_finite(name, grads)?;
        self.step += 1;
        for i in 0..params.len() {
            update(cfg, lr, self.step, &mut self.m[i], &mut self.v[i], &mut params[i], grads[i]);
        }
        Ok(())
    }
}

/// Moments of a vector of independently updated scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMoments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub steps: Vec<u64>,
}

impl ScalarMoments {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            steps: vec![0; len],
        }
    }

    /// Updates only the entries flagged in `touched`.
    pub fn apply(
        &mut self,
        cfg: &AdamConfig,
        lr: f64,
        name: &str,
        params: &mut [f64],
        grads: &[f64],
        touched: &[bool],
    ) -> Result<()> {
        check_finite(name, grads)?;
        for i in (0..params.len()).filter(|&i| touched[i]) {
            self.steps[i] += 1;
            update(cfg, lr, self.steps[i], &mut self.m[i], &mut self.v[i], &mut params[i], grads[i]);
        }
        Ok(())
    }
}

/// Optimizer state for every learnable tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub cell: Vec<Moments>,
    pub omega: Moments,
    pub delta_ne: ScalarMoments,
    pub delta_co: ScalarMoments,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, params: &AggregatorParams, omega_len: usize, nodes: usize) -> Self {
        Self {
            config,
            cell: params.tensors().iter().map(|t| Moments::new(t.len())).collect(),
            omega: Moments::new(omega_len),
            delta_ne: ScalarMoments::new(nodes),
            delta_co: ScalarMoments::new(nodes),
        }
    }
}
