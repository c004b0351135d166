//! Feed-forward baseline classifier: four ELU dense blocks and a sigmoid
//! output trained with binary cross-entropy.

use super::{SigmoidClassifier, TrainConfig};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::nn::{bce_loss, Param, Parameterized};
use crate::numerics::{Matrix, Rng};

pub const FFNN_BLOCKS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FfnnModel {
    pub standardizer: Standardizer,
    pub net: SigmoidClassifier,
}

impl FfnnModel {
    pub fn new(dim: usize, config: &TrainConfig, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            standardizer: Standardizer::identity(dim),
            net: SigmoidClassifier::new(dim, FFNN_BLOCKS, config.block_width, config.dropout, rng)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    fn check(&self, x: &Matrix, labels: Option<&[usize]>) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::shape("ffnn_forward", x.shape(), (x.rows(), self.dim())));
        }
        if let Some(labels) = labels {
            if labels.len() != x.rows() {
                return Err(Error::shape("ffnn_loss", x.shape(), (labels.len(), 1)));
            }
            if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
                return Err(Error::LabelOutOfRange { label: bad, classes: 2 });
            }
        }
        Ok(())
    }

    /// Probability of class 1 per row.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.check(x, None)?;
        self.net.predict(&self.standardizer.apply(x)?)
    }

    /// Mean BCE without dropout.
    pub fn loss(&self, x: &Matrix, labels: &[usize]) -> Result<f64> {
        self.check(x, Some(labels))?;
        Ok(bce_loss(&self.predict(x)?, &targets(labels)).0)
    }

    /// Mean BCE with freshly reset parameter gradients.
    pub fn loss_and_grad(&mut self, x: &Matrix, labels: &[usize], rng: Option<&mut Rng>) -> Result<f64> {
        self.check(x, Some(labels))?;
        self.zero_grad();
        let (p, cache) = self.net.forward(&self.standardizer.apply(x)?, rng)?;
        let (loss, grad) = bce_loss(&p, &targets(labels));
        self.net.backward(&cache, &grad);
        Ok(loss)
    }
}

fn targets(labels: &[usize]) -> Vec<f64> {
    labels.iter().map(|&l| l as f64).collect()
}

impl Parameterized for FfnnModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.net.visit_params(f);
    }
}
