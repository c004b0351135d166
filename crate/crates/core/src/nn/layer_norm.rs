//! Per-row layer normalization with an affine gain and bias.

use crate::error::{Error, Result};
use crate::nn::{Param, Parameterized};
use crate::numerics::Matrix;

pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gain: Param,
    pub bias: Param,
}

#[derive(Debug, Clone)]
pub struct LayerNormCache {
    normalized: Matrix,
    inv_std: Vec<f64>,
}

impl LayerNorm {
    pub fn new(dim: usize) -> Result<Self> {
        Self::from_parts(vec![1.0; dim], vec![0.0; dim])
    }

    pub fn from_parts(gain: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if gain.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "layer norm needs feature dimension >= 2, got {}",
                gain.len()
            )));
        }
        if gain.len() != bias.len() {
            return Err(Error::shape("LayerNorm", (1, gain.len()), (1, bias.len())));
        }
        Ok(Self {
            gain: Param::new(Matrix::row_vector(gain)),
            bias: Param::new(Matrix::row_vector(bias)),
        })
    }

    pub fn dim(&self) -> usize {
        self.gain.value.cols()
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, LayerNormCache)> {
        let d = self.dim();
        if x.cols() != d {
            return Err(Error::shape("layer_norm_forward", x.shape(), (1, d)));
        }
        let gain = self.gain.value.data();
        let bias = self.bias.value.data();
        let mut normalized = Matrix::zeros(x.rows(), d);
        let mut out = Matrix::zeros(x.rows(), d);
        let mut inv_std = Vec::with_capacity(x.rows());
        for i in 0..x.rows() {
            let row = x.row(i);
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std.push(inv);
            let nrow = normalized.row_mut(i);
            for (n, v) in nrow.iter_mut().zip(row) {
                *n = (v - mean) * inv;
            }
            let nrow = normalized.row(i).to_vec();
            for (j, o) in out.row_mut(i).iter_mut().enumerate() {
                *o = nrow[j] * gain[j] + bias[j];
            }
        }
        Ok((out, LayerNormCache { normalized, inv_std }))
    }

    pub fn backward(&mut self, cache: &LayerNormCache, grad_out: &Matrix) -> Matrix {
        let d = self.dim();
        let n = grad_out.rows();
        let gain = self.gain.value.data().to_vec();
        let mut grad_in = Matrix::zeros(n, d);
        {
            let gg = self.gain.grad.data_mut();
            for i in 0..n {
                for j in 0..d {
                    gg[j] += grad_out[(i, j)] * cache.normalized[(i, j)];
                }
            }
        }
        {
            let gb = self.bias.grad.data_mut();
            for (g, v) in gb.iter_mut().zip(grad_out.sum_rows()) {
                *g += v;
            }
        }
        for i in 0..n {
            let xhat = cache.normalized.row(i);
            let dxhat: Vec<f64> = grad_out.row(i).iter().zip(&gain).map(|(g, w)| g * w).collect();
            let sum_d: f64 = dxhat.iter().sum();
            let sum_dx: f64 = dxhat.iter().zip(xhat).map(|(a, b)| a * b).sum();
            let k = cache.inv_std[i] / d as f64;
            for (j, o) in grad_in.row_mut(i).iter_mut().enumerate() {
                *o = k * (d as f64 * dxhat[j] - sum_d - xhat[j] * sum_dx);
            }
        }
        grad_in
    }
}

impl Parameterized for LayerNorm {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(&mut self.gain);
        f(&mut self.bias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_grad, relative_error, Rng};

    #[test]
    fn constant_row_yields_bias() {
        let ln = LayerNorm::from_parts(vec![2.0, 3.0, 4.0], vec![0.1, 0.2, 0.3]).unwrap();
        let (y, _) = ln.forward(&Matrix::filled(1, 3, 7.0)).unwrap();
        for (a, b) in y.data().iter().zip([0.1, 0.2, 0.3]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_element_row() {
        let ln = LayerNorm::new(2).unwrap();
        let (y, _) = ln.forward(&Matrix::row_vector(vec![1.0, 3.0])).unwrap();
        // population variance 1, so only eps separates this from exactly ±1
        assert!((y.data()[0] + 1.0).abs() < 1e-5);
        assert!((y.data()[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_scalar_features() {
        assert!(LayerNorm::new(1).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = Rng::new(8);
        let gain: Vec<f64> = (0..5).map(|_| rng.uniform_range(0.5, 1.5)).collect();
        let bias: Vec<f64> = (0..5).map(|_| rng.uniform_range(-0.5, 0.5)).collect();
        let mut ln = LayerNorm::from_parts(gain, bias).unwrap();
        let x = Matrix::new(4, 5, (0..20).map(|_| rng.gaussian()).collect()).unwrap();
        let up = Matrix::new(4, 5, (0..20).map(|_| rng.gaussian()).collect()).unwrap();
        let probe = ln.clone();
        let loss = |l: &LayerNorm, x: &Matrix| l.forward(x).unwrap().0.hadamard(&up).sum();

        let (_, cache) = ln.forward(&x).unwrap();
        let gx = ln.backward(&cache, &up);
        let nx = finite_diff_grad(|m| loss(&probe, m), &x, 1e-6).unwrap();
        assert!(relative_error(&gx, &nx) < 1e-5);

        let ng = finite_diff_grad(
            |g| {
                let mut l = probe.clone();
                l.gain.value = g.clone();
                loss(&l, &x)
            },
            &probe.gain.value,
            1e-6,
        )
        .unwrap();
        assert!(relative_error(&ln.gain.grad, &ng) < 1e-5);
    }
}
