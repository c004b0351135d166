//! Plain stack of dense layers, each followed by its own activation.

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Param, Parameterized};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
    pub activations: Vec<Activation>,
}

#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
}

impl Mlp {
    /// Glorot-initialized network through the given widths
    /// (`widths[0]` is the input size).
    pub fn new(widths: &[usize], activations: &[Activation], rng: &mut Rng) -> Result<Self> {
        if widths.len() < 2 || activations.len() != widths.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "mlp needs n+1 widths for n activations, got {} widths and {} activations",
                widths.len(),
                activations.len()
            )));
        }
        let layers = widths
            .windows(2)
            .map(|w| DenseLayer::glorot(w[0], w[1], rng))
            .collect();
        Self::from_layers(layers, activations.to_vec())
    }

    pub fn from_layers(layers: Vec<DenseLayer>, activations: Vec<Activation>) -> Result<Self> {
        if layers.is_empty() || layers.len() != activations.len() {
            return Err(Error::InvalidConfig("mlp layer/activation count mismatch".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(
                    "Mlp::from_layers",
                    pair[0].weights.value.shape(),
                    pair[1].weights.value.shape(),
                ));
            }
        }
        Ok(Self { layers, activations })
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Zeroes the final layer so the network starts as the constant map
    /// `activation(0)`.
    pub fn zero_output_layer(&mut self) {
        let last = self.layers.last_mut().expect("non-empty");
        last.weights.value.data_mut().fill(0.0);
        last.bias.value.data_mut().fill(0.0);
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, MlpCache)> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (layer, act) in self.layers.iter().zip(&self.activations) {
            let z = layer.forward(&h)?;
            let next = act.forward(&z);
            inputs.push(h);
            pre_activations.push(z);
            h = next;
        }
        Ok((
            h,
            MlpCache {
                inputs,
                pre_activations,
            },
        ))
    }

    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        let mut h = self.layers[0].forward(x)?;
        h = self.activations[0].forward(&h);
        for (layer, act) in self.layers.iter().zip(&self.activations).skip(1) {
            h = act.forward(&layer.forward(&h)?);
        }
        Ok(h)
    }

    pub fn backward(&mut self, cache: &MlpCache, grad_out: &Matrix) -> Matrix {
        let mut g = grad_out.clone();
        for i in (0..self.layers.len()).rev() {
            g = self.activations[i].backward(&cache.pre_activations[i], &g);
            g = self.layers[i].backward(&cache.inputs[i], &g);
        }
        g
    }
}

impl Parameterized for Mlp {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        for layer in &mut self.layers {
            layer.visit_params(f);
        }
    }
}
