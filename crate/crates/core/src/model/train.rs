//! Minibatch Adam training over shuffled epochs.

use super::{CccpDeModel, FfnnModel, GlmPrediction, GlmRegressor, TrainConfig};
use crate::data::{Dataset, RegressionData, Standardizer};
use crate::error::{Error, Result};
use crate::nn::{AdamState, Parameterized};
use crate::numerics::{Matrix, Rng};

/// Loss trace of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss of each epoch, with dropout active.
    pub epoch_losses: Vec<f64>,
    /// Loss of every minibatch, in order.
    pub step_losses: Vec<f64>,
    /// Optimizer steps taken.
    pub steps: u64,
    /// Loss over the full training set after the last step, without dropout.
    pub final_loss: f64,
}

/// A labelled classifier the generic trainer can fit.
pub trait Trainable: Parameterized {
    fn input_dim(&self) -> usize;

    /// Fits data-dependent state (standardizer, class statistics) before the
    /// first epoch.
    fn prepare(&mut self, ds: &Dataset, config: &TrainConfig) -> Result<()>;

    /// Batch loss with fresh parameter gradients.
    fn batch_loss_and_grad(
        &mut self,
        x: &Matrix,
        labels: &[usize],
        config: &TrainConfig,
        rng: &mut Rng,
    ) -> Result<f64>;

    /// Deterministic loss, as reported after training.
    fn eval_loss(&self, x: &Matrix, labels: &[usize], config: &TrainConfig) -> Result<f64>;
}

impl Trainable for CccpDeModel {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn prepare(&mut self, ds: &Dataset, config: &TrainConfig) -> Result<()> {
        if ds.num_classes() > self.num_classes() {
            return Err(Error::LabelOutOfRange {
                label: ds.num_classes() - 1,
                classes: self.num_classes(),
            });
        }
        if config.standardize {
            self.standardizer = Standardizer::fit(&ds.features)?;
        }
        let mut counts = vec![0.0; self.num_classes()];
        for (c, n) in counts.iter_mut().zip(ds.class_counts()) {
            *c = n as f64;
        }
        self.set_class_counts(counts)
    }

    fn batch_loss_and_grad(
        &mut self,
        x: &Matrix,
        labels: &[usize],
        config: &TrainConfig,
        rng: &mut Rng,
    ) -> Result<f64> {
        Ok(self.loss_and_grad(x, labels, config.weights, Some(rng))?.total)
    }

    fn eval_loss(&self, x: &Matrix, labels: &[usize], config: &TrainConfig) -> Result<f64> {
        Ok(self.loss(x, labels, config.weights)?.total)
    }
}

impl Trainable for FfnnModel {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn prepare(&mut self, ds: &Dataset, config: &TrainConfig) -> Result<()> {
        if ds.num_classes() > 2 {
            return Err(Error::Unsupported(format!(
                "the feed-forward baseline is binary; dataset has {} classes",
                ds.num_classes()
            )));
        }
        if config.standardize {
            self.standardizer = Standardizer::fit(&ds.features)?;
        }
        Ok(())
    }

    fn batch_loss_and_grad(
        &mut self,
        x: &Matrix,
        labels: &[usize],
        _config: &TrainConfig,
        rng: &mut Rng,
    ) -> Result<f64> {
        self.loss_and_grad(x, labels, Some(rng))
    }

    fn eval_loss(&self, x: &Matrix, labels: &[usize], _config: &TrainConfig) -> Result<f64> {
        self.loss(x, labels)
    }
}

/// Runs `config.epochs` shuffled passes; `batch` computes a minibatch loss
/// and leaves gradients in the model.
fn run_epochs<M, F>(model: &mut M, n: usize, config: &TrainConfig, rng: &mut Rng, mut batch: F) -> Result<TrainReport>
where
    M: Parameterized,
    F: FnMut(&mut M, &[usize], &mut Rng) -> Result<f64>,
{
    let mut adam = AdamState::new(config.adam());
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut step_losses = Vec::new();
    for epoch in 0..config.epochs {
        let order = rng.permutation(n);
        let mut total = 0.0;
        for idx in order.chunks(config.minibatch) {
            let loss = batch(model, idx, rng)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "training diverged in epoch {} (loss {loss})",
                    epoch + 1
                )));
            }
            adam.step(model)?;
            total += loss * idx.len() as f64;
            step_losses.push(loss);
        }
        let mean = total / n as f64;
        log::debug!("epoch {}: loss {mean:.6}", epoch + 1);
        epoch_losses.push(mean);
    }
    Ok(TrainReport {
        epoch_losses,
        step_losses,
        steps: adam.steps_taken(),
        final_loss: f64::NAN,
    })
}

/// Fits `model` to `ds`. Deterministic given the model, data, config and
/// `rng` state; `rng` drives both shuffling and dropout.
pub fn train<T: Trainable>(model: &mut T, ds: &Dataset, config: &TrainConfig, rng: &mut Rng) -> Result<TrainReport> {
    config.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.dim() != model.input_dim() {
        return Err(Error::shape("train", ds.features.shape(), (ds.len(), model.input_dim())));
    }
    model.prepare(ds, config)?;
    let mut report = run_epochs(model, ds.len(), config, rng, |m, idx, rng| {
        let x = ds.features.select_rows(idx);
        let labels: Vec<usize> = idx.iter().map(|&i| ds.labels[i]).collect();
        m.batch_loss_and_grad(&x, &labels, config, rng)
    })?;
    report.final_loss = model.eval_loss(&ds.features, &ds.labels, config)?;
    Ok(report)
}

/// Default settings for the one-dimensional regression demo.
pub fn glm_config() -> TrainConfig {
    TrainConfig {
        epochs: 100,
        minibatch: 64,
        learning_rate: 3e-3,
        hidden: 32,
        ..TrainConfig::default()
    }
}

pub fn fit_glm(
    model: &mut GlmRegressor,
    data: &RegressionData,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<TrainReport> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut report = run_epochs(model, data.len(), config, rng, |m, idx, _| {
        let x = data.x.select_rows(idx);
        let y: Vec<f64> = idx.iter().map(|&i| data.y[i]).collect();
        m.loss_and_grad(&x, &y)
    })?;
    report.final_loss = model.loss(&data.x, &data.y)?;
    Ok(report)
}

/// Builds a regressor with two hidden layers of `config.hidden` units,
/// trains it on `data`, and predicts at `query`. Initialization and
/// shuffling use streams derived from `config.seed`.
pub fn glm_fit_and_predict(
    data: &RegressionData,
    query: &Matrix,
    config: &TrainConfig,
) -> Result<(GlmRegressor, GlmPrediction, TrainReport)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut init = Rng::derive(config.seed, "init");
    let mut model = GlmRegressor::new(data.x.cols(), &[config.hidden, config.hidden], &mut init)?;
    let report = fit_glm(&mut model, data, config, &mut Rng::derive(config.seed, "shuffle"))?;
    let prediction = model.predict(query)?;
    Ok((model, prediction, report))
}
