use crate::error::{Error, Result};
use crate::nn::AdamConfig;

/// Relative weights of the class-conditional NLL and the discriminative
/// BCE term in the joint loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub nll: f64,
    pub bce: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { nll: 1.0, bce: 1.0 }
    }
}

/// Architecture and optimization settings. Defaults are sized for small
/// low-dimensional problems.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Hidden width of the coupling s/t networks.
    pub hidden: usize,
    /// Width of the dense blocks in the classifier heads.
    pub block_width: usize,
    pub dropout: f64,
    pub base_depth: usize,
    pub head_depth: usize,
    pub weights: LossWeights,
    /// Fit the input standardizer on the training features before training.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            minibatch: 128,
            learning_rate: 1e-3,
            seed: 0,
            hidden: 64,
            block_width: 64,
            dropout: 0.05,
            base_depth: 3,
            head_depth: 1,
            weights: LossWeights::default(),
            standardize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.epochs == 0 {
            return bad("epochs must be ≥ 1".into());
        }
        if self.minibatch == 0 {
            return bad("minibatch must be ≥ 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.hidden == 0 || self.block_width < 2 {
            return bad("hidden widths must be positive (block width ≥ 2)".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        let w = self.weights;
        if !(w.nll >= 0.0 && w.bce >= 0.0 && w.nll.is_finite() && w.bce.is_finite()) {
            return bad(format!("loss weights must be ≥ 0, got ({}, {})", w.nll, w.bce));
        }
        if w.nll == 0.0 && w.bce == 0.0 {
            return bad("at least one loss weight must be positive".into());
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.learning_rate,
            ..AdamConfig::default()
        }
    }
}
