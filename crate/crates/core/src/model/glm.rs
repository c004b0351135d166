//! Heteroscedastic Gaussian regressor: a shared hidden network with one
//! linear head for the mean and one for the log-variance.

use crate::error::{Error, Result};
use crate::nn::{gaussian_nll_loss, Activation, DenseLayer, Mlp, Param, Parameterized};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct GlmRegressor {
    pub hidden: Mlp,
    pub mean_head: DenseLayer,
    pub log_var_head: DenseLayer,
}

/// Per-row predictive mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmPrediction {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl GlmRegressor {
    /// Tanh hidden layers of the given widths on `in_dim` inputs.
    pub fn new(in_dim: usize, hidden: &[usize], rng: &mut Rng) -> Result<Self> {
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::InvalidConfig("regressor needs positive hidden widths".into()));
        }
        let mut widths = vec![in_dim];
        widths.extend_from_slice(hidden);
        let hidden_net = Mlp::new(&widths, &vec![Activation::Tanh; hidden.len()], rng)?;
        let last = *hidden.last().unwrap_or(&in_dim);
        Self::from_parts(
            hidden_net,
            DenseLayer::glorot(last, 1, rng),
            DenseLayer::glorot(last, 1, rng),
        )
    }

    pub fn from_parts(hidden: Mlp, mean_head: DenseLayer, log_var_head: DenseLayer) -> Result<Self> {
        let w = hidden.out_dim();
        for head in [&mean_head, &log_var_head] {
            if head.in_dim() != w || head.out_dim() != 1 {
                return Err(Error::InvalidConfig("regressor heads must map hidden features to 1".into()));
            }
        }
        Ok(Self {
            hidden,
            mean_head,
            log_var_head,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.hidden.in_dim()
    }

    fn check(&self, x: &Matrix, y: Option<&[f64]>) -> Result<()> {
        if x.cols() != self.in_dim() {
            return Err(Error::shape("glm_forward", x.shape(), (x.rows(), self.in_dim())));
        }
        if y.is_some_and(|y| y.len() != x.rows()) {
            return Err(Error::shape("glm_loss", x.shape(), (y.map_or(0, <[f64]>::len), 1)));
        }
        Ok(())
    }

    fn heads(&self, h: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((
            self.mean_head.forward(h)?.into_data(),
            self.log_var_head.forward(h)?.into_data(),
        ))
    }

    pub fn predict(&self, x: &Matrix) -> Result<GlmPrediction> {
        self.check(x, None)?;
        let (mean, log_var) = self.heads(&self.hidden.infer(x)?)?;
        Ok(GlmPrediction {
            mean,
            std: log_var.iter().map(|lv| (0.5 * lv).exp()).collect(),
        })
    }

    pub fn loss(&self, x: &Matrix, y: &[f64]) -> Result<f64> {
        self.check(x, Some(y))?;
        let (mean, log_var) = self.heads(&self.hidden.infer(x)?)?;
        Ok(gaussian_nll_loss(&mean, &log_var, y).0)
    }

    pub fn loss_and_grad(&mut self, x: &Matrix, y: &[f64]) -> Result<f64> {
        self.check(x, Some(y))?;
        self.zero_grad();
        let (h, cache) = self.hidden.forward(x)?;
        let (mean, log_var) = self.heads(&h)?;
        let (loss, g) = gaussian_nll_loss(&mean, &log_var, y);
        let mut grad_h = self.mean_head.backward(&h, &Matrix::column_vector(g.mu));
        grad_h.add_assign(&self.log_var_head.backward(&h, &Matrix::column_vector(g.log_var)));
        self.hidden.backward(&cache, &grad_h);
        Ok(loss)
    }
}

impl Parameterized for GlmRegressor {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.hidden.visit_params(f);
        self.mean_head.visit_params(f);
        self.log_var_head.visit_params(f);
    }
}
