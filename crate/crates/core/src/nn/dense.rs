//! Affine layer `y = xW + b`.

use crate::error::{Error, Result};
use crate::nn::{Param, Parameterized};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `in x out`.
    pub weights: Param,
    /// `1 x out`.
    pub bias: Param,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| rng.uniform_range(-limit, limit))
            .collect();
        Self::from_parts(
            Matrix::new(in_dim, out_dim, w).expect("sized above"),
            vec![0.0; out_dim],
        )
        .expect("consistent shapes")
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self::from_parts(Matrix::zeros(in_dim, out_dim), vec![0.0; out_dim]).expect("consistent")
    }

    pub fn from_parts(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::shape(
                "DenseLayer::from_parts",
                weights.shape(),
                (1, bias.len()),
            ));
        }
        Ok(Self {
            weights: Param::new(weights),
            bias: Param::new(Matrix::row_vector(bias)),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.value.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.value.cols()
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.in_dim() {
            return Err(Error::shape("dense_forward", x.shape(), self.weights.value.shape()));
        }
        let mut y = x.matmul(&self.weights.value)?;
        y.add_row(self.bias.value.data());
        Ok(y)
    }

    /// Accumulates parameter gradients for the batch `input` and returns the
    /// gradient with respect to `input`.
    pub fn backward(&mut self, input: &Matrix, grad_out: &Matrix) -> Matrix {
        let gw = input.matmul_tn(grad_out).expect("cached input matches layer");
        self.weights.grad.add_assign(&gw);
        let gb = grad_out.sum_rows();
        for (g, v) in self.bias.grad.data_mut().iter_mut().zip(gb) {
            *g += v;
        }
        grad_out
            .matmul_nt(&self.weights.value)
            .expect("upstream gradient matches layer")
    }
}

impl Parameterized for DenseLayer {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(&mut self.weights);
        f(&mut self.bias);
    }
}
