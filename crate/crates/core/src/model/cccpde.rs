//! Class-conditional coupling-flow density estimator.
//!
//! Inputs pass through a fixed standardizer, then a shared coupling stack
//! (the base). Each class owns a coupling head on top of the base output and
//! a discriminative sigmoid classifier reads the same base output. The class
//! `k` log-density of a raw input combines the standardizer, base and head
//! log-determinants with a unit Gaussian at the head output.

use std::thread;

use super::{LossWeights, SigmoidClassifier, TrainConfig};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::flow::{standard_normal_log_pdf, FlowStack};
use crate::nn::{bce_loss, Param, Parameterized};
use crate::numerics::{gaussian_draws, Matrix, Rng};

/// Number of dense blocks in the discriminative head.
pub const DISC_BLOCKS: usize = 3;

/// Default neighborhood edge, as a multiple of each feature's training std.
pub const DEFAULT_VOLUME_SCALE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CccpDeModel {
    pub standardizer: Standardizer,
    pub base: FlowStack,
    pub heads: Vec<FlowStack>,
    pub disc: SigmoidClassifier,
    class_counts: Vec<f64>,
    class_priors: Vec<f64>,
}

/// Per-row model outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CccpDeOutput {
    /// `n × M` class-conditional log-densities in raw input coordinates.
    pub log_densities: Matrix,
    /// Discriminative head probabilities of class 1.
    pub disc_scores: Vec<f64>,
}

/// Components of the joint objective (means over the batch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLoss {
    pub total: f64,
    pub nll: f64,
    /// Zero when the model is not binary.
    pub bce: f64,
}

impl CccpDeModel {
    pub fn new(dim: usize, num_classes: usize, config: &TrainConfig, rng: &mut Rng) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 classes, got {num_classes}")));
        }
        let base = FlowStack::new(dim, config.base_depth, config.hidden, rng)?;
        let heads = (0..num_classes)
            .map(|_| FlowStack::new(dim, config.head_depth, config.hidden, rng))
            .collect::<Result<Vec<_>>>()?;
        let disc = SigmoidClassifier::new(dim, DISC_BLOCKS, config.block_width, config.dropout, rng)?;
        Self::from_parts(
            Standardizer::identity(dim),
            base,
            heads,
            disc,
            vec![0.0; num_classes],
        )
    }

    pub fn from_parts(
        standardizer: Standardizer,
        base: FlowStack,
        heads: Vec<FlowStack>,
        disc: SigmoidClassifier,
        class_counts: Vec<f64>,
    ) -> Result<Self> {
        let dim = base.dim();
        if heads.len() < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 heads, got {}", heads.len())));
        }
        if standardizer.dim() != dim || disc.in_dim() != dim || heads.iter().any(|h| h.dim() != dim) {
            return Err(Error::InvalidConfig("model parts disagree on input dimension".into()));
        }
        let mut model = Self {
            standardizer,
            base,
            heads,
            disc,
            class_counts: Vec::new(),
            class_priors: Vec::new(),
        };
        model.set_class_counts(class_counts)?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn num_classes(&self) -> usize {
        self.heads.len()
    }

    pub fn class_counts(&self) -> &[f64] {
        &self.class_counts
    }

    pub fn class_priors(&self) -> &[f64] {
        &self.class_priors
    }

    /// Sets `N_k` and derives `π_k = N_k / Σ N`; all-zero counts give
    /// uniform priors.
    pub fn set_class_counts(&mut self, counts: Vec<f64>) -> Result<()> {
        if counts.len() != self.num_classes() {
            return Err(Error::InvalidConfig(format!(
                "{} class counts for {} classes",
                counts.len(),
                self.num_classes()
            )));
        }
        if counts.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::Domain("class counts must be finite and ≥ 0".into()));
        }
        let total: f64 = counts.iter().sum();
        self.class_priors = if total > 0.0 {
            counts.iter().map(|c| c / total).collect()
        } else {
            vec![1.0 / counts.len() as f64; counts.len()]
        };
        self.class_counts = counts;
        Ok(())
    }

    /// `Π_j (scale · std_j)` over the standardizer's training std.
    pub fn neighborhood_volume(&self, scale: f64) -> f64 {
        self.standardizer.std().iter().map(|s| scale * s).product()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::shape("cccpde_forward", x.shape(), (x.rows(), self.dim())));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Matrix) -> Result<CccpDeOutput> {
        self.check_input(x)?;
        let xs = self.standardizer.apply(x)?;
        let offset = self.standardizer.log_det();
        let (h, base_ld) = self.base.transform(&xs)?;
        let n = x.rows();
        let m = self.num_classes();
        let mut logp = Matrix::zeros(n, m);
        for (k, head) in self.heads.iter().enumerate() {
            let (z, ld) = head.transform(&h)?;
            for (i, lp) in standard_normal_log_pdf(&z).into_iter().enumerate() {
                logp.row_mut(i)[k] = lp + ld[i] + base_ld[i] + offset;
            }
        }
        Ok(CccpDeOutput {
            log_densities: logp,
            disc_scores: self.disc.predict(&h)?,
        })
    }

    /// Same result as [`CccpDeModel::forward`], computed over row chunks on
    /// up to `threads` worker threads.
    pub fn forward_parallel(&self, x: &Matrix, threads: usize) -> Result<CccpDeOutput> {
        self.check_input(x)?;
        let n = x.rows();
        if threads <= 1 || n < 2 * threads {
            return self.forward(x);
        }
        let chunk = n.div_ceil(threads);
        let ranges: Vec<Vec<usize>> = (0..n)
            .step_by(chunk)
            .map(|s| (s..(s + chunk).min(n)).collect())
            .collect();
        let parts: Vec<Result<CccpDeOutput>> = thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .iter()
                .map(|rows| scope.spawn(move || self.forward(&x.select_rows(rows))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("inference worker panicked"))
                .collect()
        });
        let mut logp = Vec::with_capacity(n * self.num_classes());
        let mut disc = Vec::with_capacity(n);
        for part in parts {
            let part = part?;
            logp.extend_from_slice(part.log_densities.data());
            disc.extend(part.disc_scores);
        }
        Ok(CccpDeOutput {
            log_densities: Matrix::new(n, self.num_classes(), logp)?,
            disc_scores: disc,
        })
    }

    /// Draws `n` raw-space samples from class `class`.
    pub fn sample(&self, class: usize, n: usize, rng: &mut Rng) -> Result<Matrix> {
        let head = self.heads.get(class).ok_or(Error::LabelOutOfRange {
            label: class,
            classes: self.num_classes(),
        })?;
        let z = Matrix::new(n, self.dim(), gaussian_draws(rng, n * self.dim()))?;
        let h = head.inverse(&z)?;
        self.standardizer.invert(&self.base.inverse(&h)?)
    }

    fn check_labels(&self, x: &Matrix, labels: &[usize], weights: LossWeights) -> Result<()> {
        self.check_input(x)?;
        if labels.len() != x.rows() {
            return Err(Error::shape("joint_loss", x.shape(), (labels.len(), 1)));
        }
        if x.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.num_classes()) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                classes: self.num_classes(),
            });
        }
        if weights.bce > 0.0 && self.num_classes() != 2 {
            return Err(Error::InvalidConfig(format!(
                "the discriminative loss needs 2 classes, model has {}; set its weight to 0",
                self.num_classes()
            )));
        }
        Ok(())
    }

    fn combine(&self, nll_terms: &[f64], bce: f64, weights: LossWeights) -> JointLoss {
        let nll = nll_terms.iter().sum::<f64>() / nll_terms.len() as f64;
        JointLoss {
            total: weights.nll * nll + weights.bce * bce,
            nll,
            bce,
        }
    }

    /// Joint objective without dropout and without touching gradients.
    pub fn loss(&self, x: &Matrix, labels: &[usize], weights: LossWeights) -> Result<JointLoss> {
        self.check_labels(x, labels, weights)?;
        let out = self.forward(x)?;
        let nll: Vec<f64> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| -out.log_densities[(i, l)])
            .collect();
        let bce = if self.num_classes() == 2 {
            bce_loss(&out.disc_scores, &binary_targets(labels)).0
        } else {
            0.0
        };
        Ok(self.combine(&nll, bce, weights))
    }

    /// Joint objective with gradients: parameter gradients are reset and then
    /// filled for this batch. Each row contributes the NLL of its own class
    /// head; both terms back-propagate through the base. `rng` enables
    /// dropout in the discriminative head.
    pub fn loss_and_grad(
        &mut self,
        x: &Matrix,
        labels: &[usize],
        weights: LossWeights,
        rng: Option<&mut Rng>,
    ) -> Result<JointLoss> {
        self.check_labels(x, labels, weights)?;
        self.zero_grad();
        let n = x.rows();
        let scale = weights.nll / n as f64;
        let xs = self.standardizer.apply(x)?;
        let offset = self.standardizer.log_det();
        let (h, base_ld, base_cache) = self.base.forward(&xs)?;

        let mut nll = vec![0.0; n];
        let mut grad_h = Matrix::zeros(n, self.dim());
        for k in 0..self.num_classes() {
            let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
            if rows.is_empty() {
                continue;
            }
            let (z, ld, cache) = self.heads[k].forward(&h.select_rows(&rows))?;
            for ((&i, lp), ldi) in rows.iter().zip(standard_normal_log_pdf(&z)).zip(&ld) {
                nll[i] = -(lp + ldi + base_ld[i] + offset);
            }
            let g = self.heads[k].backward(&cache, &z.scale(scale), &vec![-scale; rows.len()]);
            for (r, &i) in rows.iter().enumerate() {
                grad_h.row_mut(i).copy_from_slice(g.row(r));
            }
        }

        let mut bce = 0.0;
        if self.num_classes() == 2 {
            let (p, cache) = self.disc.forward(&h, rng)?;
            let (value, grad_p) = bce_loss(&p, &binary_targets(labels));
            bce = value;
            if weights.bce > 0.0 {
                let grad_p: Vec<f64> = grad_p.iter().map(|g| g * weights.bce).collect();
                grad_h.add_assign(&self.disc.backward(&cache, &grad_p));
            }
        }

        self.base.backward(&base_cache, &grad_h, &vec![-scale; n]);
        Ok(self.combine(&nll, bce, weights))
    }
}

fn binary_targets(labels: &[usize]) -> Vec<f64> {
    labels.iter().map(|&l| if l == 1 { 1.0 } else { 0.0 }).collect()
}

impl Parameterized for CccpDeModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.base.visit_params(f);
        for head in &mut self.heads {
            head.visit_params(f);
        }
        self.disc.visit_params(f);
    }
}
