//! One RealNVP affine coupling layer.
//!
//! With `p` the layer's permutation and `d` the split index:
//!
//! ```text
//! u       = x[:, p]
//! y[:d]   = u[:d]
//! y[d:]   = u[d:] ⊙ exp(s(u[:d])) + t(u[:d])
//! logdet  = Σ s(u[:d])
//! ```
//!
//! The output stays in permuted coordinate order; the next layer applies its
//! own permutation on top.

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Mlp, MlpCache, Param, Parameterized};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLayer {
    dim: usize,
    split: usize,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    /// Log-scale network, `d -> D - d`, tanh output.
    pub s_net: Mlp,
    /// Translation network, `d -> D - d`, linear output.
    pub t_net: Mlp,
}

#[derive(Debug, Clone)]
pub struct CouplingCache {
    active: Matrix,
    exp_s: Matrix,
    s_cache: MlpCache,
    t_cache: MlpCache,
}

impl CouplingLayer {
    /// Random permutation, `d = ⌊D/2⌋`, s/t nets with two leaky-ReLU hidden
    /// layers of width `hidden`. Output layers start at zero so the layer is
    /// initially a pure permutation.
    pub fn new(dim: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidConfig(format!("coupling layers need D >= 2, got {dim}")));
        }
        if hidden == 0 {
            return Err(Error::InvalidConfig("hidden width must be positive".into()));
        }
        let split = dim / 2;
        let perm = rng.permutation(dim);
        let widths = [split, hidden, hidden, dim - split];
        let mut s_net = Mlp::new(
            &widths,
            &[Activation::LeakyRelu, Activation::LeakyRelu, Activation::Tanh],
            rng,
        )?;
        let mut t_net = Mlp::new(
            &widths,
            &[Activation::LeakyRelu, Activation::LeakyRelu, Activation::Identity],
            rng,
        )?;
        s_net.zero_output_layer();
        t_net.zero_output_layer();
        Self::from_parts(dim, perm, s_net, t_net)
    }

    /// A layer whose log-scale and shift are the constants `log_scale` and
    /// `shift` everywhere. `|log_scale| < 1` because the scale passes
    /// through tanh.
    pub fn constant(dim: usize, perm: Vec<usize>, log_scale: f64, shift: f64) -> Result<Self> {
        if log_scale.abs() >= 1.0 {
            return Err(Error::Domain(format!("constant log-scale {log_scale} outside (-1, 1)")));
        }
        let split = dim / 2;
        let out = dim - split;
        let s_net = Mlp::from_layers(
            vec![DenseLayer::from_parts(Matrix::zeros(split, out), vec![log_scale.atanh(); out])?],
            vec![Activation::Tanh],
        )?;
        let t_net = Mlp::from_layers(
            vec![DenseLayer::from_parts(Matrix::zeros(split, out), vec![shift; out])?],
            vec![Activation::Identity],
        )?;
        Self::from_parts(dim, perm, s_net, t_net)
    }

    pub fn from_parts(dim: usize, perm: Vec<usize>, s_net: Mlp, t_net: Mlp) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidConfig(format!("coupling layers need D >= 2, got {dim}")));
        }
        let split = dim / 2;
        if perm.len() != dim {
            return Err(Error::InvalidConfig(format!(
                "permutation has {} entries for D = {dim}",
                perm.len()
            )));
        }
        let mut inv_perm = vec![usize::MAX; dim];
        for (j, &p) in perm.iter().enumerate() {
            if p >= dim || inv_perm[p] != usize::MAX {
                return Err(Error::InvalidConfig(format!("{perm:?} is not a permutation")));
            }
            inv_perm[p] = j;
        }
        for (name, net) in [("s", &s_net), ("t", &t_net)] {
            if net.in_dim() != split || net.out_dim() != dim - split {
                return Err(Error::InvalidConfig(format!(
                    "{name}-net maps {} -> {}, expected {split} -> {}",
                    net.in_dim(),
                    net.out_dim(),
                    dim - split
                )));
            }
        }
        Ok(Self {
            dim,
            split,
            perm,
            inv_perm,
            s_net,
            t_net,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse_permutation(&self) -> &[usize] {
        &self.inv_perm
    }

    fn check(&self, x: &Matrix, op: &'static str) -> Result<()> {
        if x.cols() != self.dim {
            return Err(Error::shape(op, x.shape(), (x.rows(), self.dim)));
        }
        Ok(())
    }

    /// Forward transform with the cache needed by [`CouplingLayer::backward`].
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>, CouplingCache)> {
        self.check(x, "coupling_forward")?;
        let (passive, active) = x.select_cols(&self.perm).split_cols(self.split);
        let (s, s_cache) = self.s_net.forward(&passive)?;
        let (t, t_cache) = self.t_net.forward(&passive)?;
        let exp_s = s.map(f64::exp);
        let y_active = active.hadamard(&exp_s).add(&t);
        let logdet = s.sum_cols();
        let y = Matrix::hstack(&passive, &y_active);
        Ok((
            y,
            logdet,
            CouplingCache {
                active,
                exp_s,
                s_cache,
                t_cache,
            },
        ))
    }

    /// Forward transform and per-row log-determinant, no cache.
    pub fn transform(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        self.check(x, "coupling_forward")?;
        let (passive, active) = x.select_cols(&self.perm).split_cols(self.split);
        let s = self.s_net.infer(&passive)?;
        let t = self.t_net.infer(&passive)?;
        let y_active = active.zip_map(&s, |a, s| a * s.exp()).add(&t);
        Ok((Matrix::hstack(&passive, &y_active), s.sum_cols()))
    }

    /// Exact inverse of [`CouplingLayer::transform`].
    pub fn inverse(&self, y: &Matrix) -> Result<Matrix> {
        self.check(y, "coupling_inverse")?;
        let (passive, y_active) = y.split_cols(self.split);
        let s = self.s_net.infer(&passive)?;
        let t = self.t_net.infer(&passive)?;
        let active = y_active.sub(&t).zip_map(&s, |v, s| v * (-s).exp());
        Ok(Matrix::hstack(&passive, &active).select_cols(&self.inv_perm))
    }

    /// Back-propagates `grad_y` (gradient of the loss with respect to the
    /// output) and `grad_logdet` (per-row gradient with respect to the
    /// log-determinant). Returns the gradient with respect to the input.
    pub fn backward(&mut self, cache: &CouplingCache, grad_y: &Matrix, grad_logdet: &[f64]) -> Matrix {
        let (g_passive_out, g_active_out) = grad_y.split_cols(self.split);
        let g_active_in = g_active_out.hadamard(&cache.exp_s);
        let mut g_s = g_active_out.hadamard(&cache.active).hadamard(&cache.exp_s);
        for (i, &gl) in grad_logdet.iter().enumerate() {
            for v in g_s.row_mut(i) {
                *v += gl;
            }
        }
        let g_passive_s = self.s_net.backward(&cache.s_cache, &g_s);
        let g_passive_t = self.t_net.backward(&cache.t_cache, &g_active_out);
        let g_passive = g_passive_out.add(&g_passive_s).add(&g_passive_t);
        Matrix::hstack(&g_passive, &g_active_in).select_cols(&self.inv_perm)
    }
}

impl Parameterized for CouplingLayer {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.s_net.visit_params(f);
        self.t_net.visit_params(f);
    }
}
