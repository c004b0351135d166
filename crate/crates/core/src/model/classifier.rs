//! Dense blocks followed by a single sigmoid output unit.

use crate::error::{Error, Result};
use crate::nn::{sigmoid, Activation, DenseBlock, DenseBlockCache, DenseLayer, Param, Parameterized};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidClassifier {
    pub blocks: Vec<DenseBlock>,
    pub output: DenseLayer,
}

#[derive(Debug, Clone)]
pub struct ClassifierCache {
    blocks: Vec<DenseBlockCache>,
    features: Matrix,
    probs: Vec<f64>,
}

impl SigmoidClassifier {
    /// `depth` ELU blocks of `width` units, then a dense layer to one logit.
    pub fn new(in_dim: usize, depth: usize, width: usize, dropout: f64, rng: &mut Rng) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidConfig("classifier needs at least one dense block".into()));
        }
        let mut blocks = Vec::with_capacity(depth);
        let mut d = in_dim;
        for _ in 0..depth {
            blocks.push(DenseBlock::new(d, width, dropout, Activation::Elu, rng)?);
            d = width;
        }
        Ok(Self {
            blocks,
            output: DenseLayer::glorot(width, 1, rng),
        })
    }

    pub fn from_parts(blocks: Vec<DenseBlock>, output: DenseLayer) -> Result<Self> {
        let mut d = match blocks.first() {
            Some(b) => b.in_dim(),
            None => return Err(Error::InvalidConfig("classifier needs at least one dense block".into())),
        };
        for b in &blocks {
            if b.in_dim() != d {
                return Err(Error::InvalidConfig("classifier block widths do not chain".into()));
            }
            d = b.out_dim();
        }
        if output.in_dim() != d || output.out_dim() != 1 {
            return Err(Error::InvalidConfig("classifier output layer must map to one unit".into()));
        }
        Ok(Self { blocks, output })
    }

    pub fn in_dim(&self) -> usize {
        self.blocks[0].in_dim()
    }

    /// Probabilities per row. `rng` turns on dropout.
    pub fn forward(&self, x: &Matrix, mut rng: Option<&mut Rng>) -> Result<(Vec<f64>, ClassifierCache)> {
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let (next, cache) = block.forward(&h, rng.as_deref_mut())?;
            caches.push(cache);
            h = next;
        }
        let logits = self.output.forward(&h)?;
        let probs: Vec<f64> = logits.data().iter().map(|&z| sigmoid(z)).collect();
        Ok((
            probs.clone(),
            ClassifierCache {
                blocks: caches,
                features: h,
                probs,
            },
        ))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self.forward(x, None)?.0)
    }

    /// `grad_p` is the loss gradient with respect to each probability.
    pub fn backward(&mut self, cache: &ClassifierCache, grad_p: &[f64]) -> Matrix {
        let g_logit: Vec<f64> = grad_p
            .iter()
            .zip(&cache.probs)
            .map(|(g, p)| g * p * (1.0 - p))
            .collect();
        let mut g = self.output.backward(&cache.features, &Matrix::column_vector(g_logit));
        for (block, c) in self.blocks.iter_mut().zip(&cache.blocks).rev() {
            g = block.backward(c, &g);
        }
        g
    }
}

impl Parameterized for SigmoidClassifier {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        for b in &mut self.blocks {
            b.visit_params(f);
        }
        self.output.visit_params(f);
    }
}
