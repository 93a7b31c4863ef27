use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::params::ParameterStore;
use super::tensor::round_in_place;

/// Adam moment buffers and hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    first: BTreeMap<String, Vec<f64>>,
    second: BTreeMap<String, Vec<f64>>,
}

impl OptimizerState {
    pub fn adam(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: BTreeMap::new(),
            second: BTreeMap::new(),
        }
    }
}

/// One bias-corrected Adam update over every parameter, in sorted-name
/// order. Gradients are zeroed afterwards.
pub fn adam_step(store: &mut ParameterStore, state: &mut OptimizerState) -> Result<()> {
    if let Some(name) = store.iter().find(|(_, t)| t.grad().is_none()).map(|(n, _)| n) {
        return Err(Error::MissingGradient(name.to_string()));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.eps, state.lr);
    for (name, param) in store.iter_mut() {
        let n = param.len();
        let m = state
            .first
            .entry(name.to_string())
            .or_insert_with(|| vec![0.0; n]);
        let v = state
            .second
            .entry(name.to_string())
            .or_insert_with(|| vec![0.0; n]);
        let grad = param.grad().expect("checked above").to_vec();
        let data = param.data_mut();
        for i in 0..n {
            let g = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            data[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        round_in_place(data);
        param.zero_grad();
    }
    Ok(())
}
