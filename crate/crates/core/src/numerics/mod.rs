//! Dense linear algebra, seeded randomness, special functions, and gradient
//! checking.

mod gradcheck;
mod matrix;
mod rng;
mod special;

pub use gradcheck::{finite_diff_grad, relative_error};
pub use matrix::Matrix;
pub use rng::{derive_seed, gaussian_draws, Rng};
pub use special::{log_ball_volume, log_beta, log_gamma, log_sum_exp};
pub(crate) use special::ln_gamma_pos;
