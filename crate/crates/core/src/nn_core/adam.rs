use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

/// Adam moments plus a cosine learning-rate schedule over `horizon` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    base_lr: f64,
    horizon: u64,
}

impl AdamState {
    pub fn new(n_params: usize, base_lr: f64, horizon: u64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
            base_lr,
            horizon: horizon.max(1),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `lr0 * (1 + cos(pi * t / T)) / 2`, clamped at zero past the horizon.
    pub fn lr_at(&self, t: u64) -> f64 {
        let frac = (t.min(self.horizon)) as f64 / self.horizon as f64;
        self.base_lr * 0.5 * (1.0 + (PI * frac).cos())
    }

    /// One bias-corrected Adam update. Non-finite gradients leave both the
    /// parameters and the state untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam state for {} parameters, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient component {i}")));
        }
        self.step += 1;
        let t = self.step;
        let lr = self.lr_at(t);
        let bc1 = 1.0 - self.beta1.powi(t.min(i32::MAX as u64) as i32);
        let bc2 = 1.0 - self.beta2.powi(t.min(i32::MAX as u64) as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
