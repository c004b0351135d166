//! Trainable dense building blocks with explicit forward and backward passes.
//!
//! Forward passes take `&self` and return a cache; backward passes take the
//! cache, accumulate parameter gradients in place, and return the gradient
//! with respect to the input.

mod activation;
mod adam;
mod block;
mod dense;
mod dropout;
mod layer_norm;
mod loss;
mod mlp;
mod param;

pub use activation::{sigmoid, Activation, LEAKY_RELU_SLOPE};
pub use adam::{AdamConfig, AdamState};
pub use block::{DenseBlock, DenseBlockCache};
pub use dense::DenseLayer;
pub use dropout::dropout;
pub use layer_norm::{LayerNorm, LayerNormCache, LAYER_NORM_EPS};
pub use loss::{bce_loss, gaussian_nll_loss, GaussianNllGrads, PROB_CLAMP};
pub use mlp::{Mlp, MlpCache};
pub use param::{Param, Parameterized};
