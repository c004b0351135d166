//! Dropout → dense → layer norm → activation.

use crate::error::{Error, Result};
use crate::nn::{dropout, Activation, DenseLayer, LayerNorm, LayerNormCache, Param, Parameterized};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    pub dropout: f64,
    pub dense: DenseLayer,
    pub norm: LayerNorm,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseBlockCache {
    mask: Option<Matrix>,
    dense_input: Matrix,
    norm: LayerNormCache,
    pre_activation: Matrix,
}

impl DenseBlock {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        dropout: f64,
        activation: Activation,
        rng: &mut Rng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::InvalidConfig(format!("dropout rate {dropout} outside [0, 1)")));
        }
        Ok(Self {
            dropout,
            dense: DenseLayer::glorot(in_dim, out_dim, rng),
            norm: LayerNorm::new(out_dim)?,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.dense.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.dense.out_dim()
    }

    /// `rng` selects training mode (dropout active); `None` is inference.
    pub fn forward(&self, x: &Matrix, rng: Option<&mut Rng>) -> Result<(Matrix, DenseBlockCache)> {
        let (dense_input, mask) = match rng {
            Some(rng) => dropout(x, self.dropout, rng, true),
            None => (x.clone(), None),
        };
        let h = self.dense.forward(&dense_input)?;
        let (normed, norm) = self.norm.forward(&h)?;
        let y = self.activation.forward(&normed);
        Ok((
            y,
            DenseBlockCache {
                mask,
                dense_input,
                norm,
                pre_activation: normed,
            },
        ))
    }

    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward(x, None)?.0)
    }

    pub fn backward(&mut self, cache: &DenseBlockCache, grad_out: &Matrix) -> Matrix {
        let g = self.activation.backward(&cache.pre_activation, grad_out);
        let g = self.norm.backward(&cache.norm, &g);
        let g = self.dense.backward(&cache.dense_input, &g);
        match &cache.mask {
            Some(mask) => g.hadamard(mask),
            None => g,
        }
    }
}

impl Parameterized for DenseBlock {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.dense.visit_params(f);
        self.norm.visit_params(f);
    }
}
