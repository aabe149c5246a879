use serde::{Deserialize, Serialize};

use super::params::ParamSet;
use crate::{Error, Result};

/// Adam moments and hyperparameters, aligned with a [`ParamSet`]'s tensor
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Number of steps taken so far.
    pub t: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new<P: ParamSet + ?Sized>(params: &P, lr: f64) -> Self {
        Self::with_betas(params, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas<P: ParamSet + ?Sized>(
        params: &P,
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    ) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|t| vec![0.0; t.data.len()])
            .collect();
        AdamState {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<P: ParamSet + ?Sized, G: ParamSet + ?Sized>(
    params: &mut P,
    grads: &G,
    state: &mut AdamState,
) -> Result<()> {
    let grads = grads.tensors();
    let mut params = params.tensors_mut();
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::shape(format!(
            "adam: {} parameter tensors, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.eps);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(&grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        if p.data.len() != g.data.len() || m.len() != p.data.len() {
            return Err(Error::shape(format!("adam: tensor {} size mismatch", p.name)));
        }
        for i in 0..p.data.len() {
            let gi = g.data[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p.data[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
