//! Adam with bias correction.

use crate::error::{Error, Result};
use crate::nn::{Param, Parameterized};
use crate::numerics::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Optimizer state. Moment buffers are created on the first step in the
/// order the model visits its parameters, and every later step must present
/// the same parameter shapes in the same order.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    moments: Vec<(Matrix, Matrix)>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            moments: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter of `model` from its accumulated
    /// gradients. Gradients are left untouched.
    pub fn step(&mut self, model: &mut dyn Parameterized) -> Result<()> {
        let mut shapes = Vec::new();
        model.visit_params(&mut |p| shapes.push(p.value.shape()));
        if self.moments.is_empty() {
            self.moments = shapes
                .iter()
                .map(|&(r, c)| (Matrix::zeros(r, c), Matrix::zeros(r, c)))
                .collect();
        } else {
            if shapes.len() != self.moments.len() {
                return Err(Error::shape(
                    "adam_step",
                    (shapes.len(), 0),
                    (self.moments.len(), 0),
                ));
            }
            for (s, (m, _)) in shapes.iter().zip(&self.moments) {
                if *s != m.shape() {
                    return Err(Error::shape("adam_step", *s, m.shape()));
                }
            }
        }

        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let mut idx = 0;
        let moments = &mut self.moments;
        model.visit_params(&mut |p: &mut Param| {
            let (m, v) = &mut moments[idx];
            idx += 1;
            let grads = p.grad.data();
            for (((w, &g), mi), vi) in p
                .value
                .data_mut()
                .iter_mut()
                .zip(grads)
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * g;
                *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *w -= lr * mhat / (vhat.sqrt() + eps);
            }
        });
        Ok(())
    }
}
