//! Adam with a time-varying first-moment decay.
//!
//! Bias correction uses running products of the per-step betas, which reduces
//! to the usual `1 - beta^t` when the betas are constant and stays correct
//! when the schedule moves `beta1` during training.

use crate::matrix::Matrix;

use super::model::{Gradients, RegressorModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
    first_bias: Vec<Vec<f64>>,
    second_bias: Vec<Vec<f64>>,
    beta1_prod: f64,
    beta2_prod: f64,
}

impl AdamState {
    pub fn new(model: &RegressorModel, cfg: AdamConfig) -> Self {
        let first = model
            .layers
            .iter()
            .map(|l| Matrix::zeros(l.weights.rows(), l.weights.cols()))
            .collect::<Vec<_>>();
        let second = first.clone();
        let first_bias = model
            .layers
            .iter()
            .map(|l| vec![0.0; l.bias.len()])
            .collect::<Vec<_>>();
        let second_bias = first_bias.clone();
        AdamState {
            cfg,
            first,
            second,
            first_bias,
            second_bias,
            beta1_prod: 1.0,
            beta2_prod: 1.0,
        }
    }

    /// One optimizer step in place. `beta1` may differ between calls.
    pub fn step(&mut self, model: &mut RegressorModel, grads: &Gradients, lr: f64, beta1: f64) {
        let beta2 = self.cfg.beta2;
        self.beta1_prod *= beta1;
        self.beta2_prod *= beta2;
        let m_corr = 1.0 - self.beta1_prod;
        let v_corr = 1.0 - self.beta2_prod;
        let eps = self.cfg.epsilon;

        let update = |theta: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / m_corr;
            let v_hat = *v / v_corr;
            *theta -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (l, layer) in model.layers.iter_mut().enumerate() {
            let mw = self.first[l].data_mut();
            let vw = self.second[l].data_mut();
            let gw = grads.weights[l].data();
            for (i, theta) in layer.weights.data_mut().iter_mut().enumerate() {
                update(theta, &mut mw[i], &mut vw[i], gw[i]);
            }
            for (i, theta) in layer.bias.iter_mut().enumerate() {
                update(
                    theta,
                    &mut self.first_bias[l][i],
                    &mut self.second_bias[l][i],
                    grads.biases[l][i],
                );
            }
        }
    }
}
