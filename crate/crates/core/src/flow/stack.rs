//! Ordered compositions of coupling layers and densities under a unit
//! Gaussian latent.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow::{CouplingCache, CouplingLayer};
use crate::nn::{Param, Parameterized};
use crate::numerics::{gaussian_draws, Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowStack {
    dim: usize,
    pub layers: Vec<CouplingLayer>,
}

#[derive(Debug, Clone)]
pub struct FlowCache {
    layers: Vec<CouplingCache>,
}

impl FlowStack {
    /// The identity map on `dim` coordinates.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            layers: Vec::new(),
        }
    }

    pub fn new(dim: usize, depth: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        let layers = (0..depth)
            .map(|_| CouplingLayer::new(dim, hidden, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, layers })
    }

    pub fn from_layers(dim: usize, layers: Vec<CouplingLayer>) -> Result<Self> {
        if let Some(bad) = layers.iter().find(|l| l.dim() != dim) {
            return Err(Error::InvalidConfig(format!(
                "layer of dimension {} in a stack of dimension {dim}",
                bad.dim()
            )));
        }
        Ok(Self { dim, layers })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    fn check(&self, x: &Matrix, op: &'static str) -> Result<()> {
        if x.cols() != self.dim {
            return Err(Error::shape(op, x.shape(), (x.rows(), self.dim)));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>, FlowCache)> {
        self.check(x, "stack_forward")?;
        let mut h = x.clone();
        let mut logdet = vec![0.0; x.rows()];
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, ld, cache) = layer.forward(&h)?;
            for (acc, v) in logdet.iter_mut().zip(ld) {
                *acc += v;
            }
            caches.push(cache);
            h = next;
        }
        Ok((h, logdet, FlowCache { layers: caches }))
    }

    /// Latent image and summed log-determinant, no cache.
    pub fn transform(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        self.check(x, "stack_forward")?;
        let mut h = x.clone();
        let mut logdet = vec![0.0; x.rows()];
        for layer in &self.layers {
            let (next, ld) = layer.transform(&h)?;
            for (acc, v) in logdet.iter_mut().zip(ld) {
                *acc += v;
            }
            h = next;
        }
        Ok((h, logdet))
    }

    pub fn inverse(&self, z: &Matrix) -> Result<Matrix> {
        self.check(z, "stack_inverse")?;
        let mut h = z.clone();
        for layer in self.layers.iter().rev() {
            h = layer.inverse(&h)?;
        }
        Ok(h)
    }

    /// `grad_logdet` applies to every layer's log-determinant, since the
    /// stack's is their sum.
    pub fn backward(&mut self, cache: &FlowCache, grad_z: &Matrix, grad_logdet: &[f64]) -> Matrix {
        let mut g = grad_z.clone();
        for (layer, c) in self.layers.iter_mut().zip(&cache.layers).rev() {
            g = layer.backward(c, &g, grad_logdet);
        }
        g
    }

    /// `ln p_X(x) = ln N(f(x); 0, I) + ln |det ∂f/∂x|` per row.
    pub fn log_density(&self, x: &Matrix) -> Result<Vec<f64>> {
        let (z, logdet) = self.transform(x)?;
        Ok(standard_normal_log_pdf(&z)
            .into_iter()
            .zip(logdet)
            .map(|(a, b)| a + b)
            .collect())
    }

    /// `n` draws pushed from the latent through the inverse map.
    pub fn sample(&self, rng: &mut Rng, n: usize) -> Result<Matrix> {
        let z = Matrix::new(n, self.dim, gaussian_draws(rng, n * self.dim))?;
        self.inverse(&z)
    }
}

impl Parameterized for FlowStack {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        for layer in &mut self.layers {
            layer.visit_params(f);
        }
    }
}

/// Row-wise `ln N(z; 0, I) = −(D/2) ln 2π − ‖z‖² / 2`.
pub fn standard_normal_log_pdf(z: &Matrix) -> Vec<f64> {
    let c = -0.5 * z.cols() as f64 * (2.0 * PI).ln();
    (0..z.rows())
        .map(|i| c - 0.5 * z.row(i).iter().map(|v| v * v).sum::<f64>())
        .collect()
}
