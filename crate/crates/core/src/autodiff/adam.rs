use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::{Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Per-parameter moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamState {
    pub fn new(config: AdamConfig, store: &ParamStore) -> Self {
        let zeros = |s: &ParamStore| {
            s.iter().map(|(_, p)| Tensor::zeros(p.value.rows(), p.value.cols())).collect::<Vec<_>>()
        };
        Self { config, step: 0, first: zeros(store), second: zeros(store) }
    }

    /// One bias-corrected Adam update of every parameter from its stored
    /// gradient. Gradients are left untouched.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<(), TensorError> {
        if store.len() != self.first.len() {
            return Err(TensorError::Shape { op: "adam_step", left: (store.len(), 0), right: (self.first.len(), 0) });
        }
        for ((p, m), v) in store.iter_mut().zip(&self.first).zip(&self.second) {
            if p.value.shape() != m.shape() || p.grad.shape() != v.shape() {
                return Err(TensorError::Shape { op: "adam_step", left: p.value.shape(), right: m.shape() });
            }
        }
        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for ((p, m), v) in store.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            if !p.requires_grad {
                continue;
            }
            let grad = p.grad.data();
            let values = p.value.data_mut();
            for i in 0..values.len() {
                let g = grad[i];
                let mi = &mut m.data_mut()[i];
                *mi = beta1 * *mi + (1.0 - beta1) * g;
                let vi = &mut v.data_mut()[i];
                *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                let m_hat = m.data()[i] / c1;
                let v_hat = v.data()[i] / c2;
                values[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Applies one Adam update to `store` using its accumulated gradients.
pub fn adam_step(store: &mut ParamStore, state: &mut AdamState) -> Result<(), TensorError> {
    state.step(store)
}
