use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Per-dimension affine rescaling `(x − mean) / std`, fitted on training
/// data only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per column. A constant column
    /// gets `std = 1` and a warning.
    pub fn fit(features: &Matrix) -> Result<Self> {
        let n = features.rows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mean: Vec<f64> = features.sum_rows().iter().map(|s| s / n as f64).collect();
        let mut var = vec![0.0; features.cols()];
        for r in 0..n {
            for ((v, x), m) in var.iter_mut().zip(features.row(r)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    log::warn!("feature {j} is constant; leaving it unscaled");
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(Error::shape("standardizer", (mean.len(), 1), (std.len(), 1)));
        }
        if std.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Domain("standardizer scales must be positive".into()));
        }
        Ok(Self { mean, std })
    }

    /// No-op rescaling of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    fn check(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::shape("standardize", x.shape(), (x.rows(), self.dim())));
        }
        Ok(())
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        self.check(x)?;
        let mut out = x.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn invert(&self, z: &Matrix) -> Result<Matrix> {
        self.check(z)?;
        let mut out = z.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }

    pub fn apply_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        ds.with_features(self.apply(&ds.features)?)
    }

    /// Log-determinant of the Jacobian of [`Standardizer::apply`].
    pub fn log_det(&self) -> f64 {
        -self.std.iter().map(|s| s.ln()).sum::<f64>()
    }
}
