//! Invertible RealNVP coupling layers, stacks, exact log-densities, and
//! sampling.
//!
//! Every forward map runs data → latent and accumulates `Σ s` as the
//! log-determinant, so `ln p_X(x) = ln p_Z(f(x)) + logdet`.

mod coupling;
mod stack;

pub use coupling::{CouplingCache, CouplingLayer};
pub use stack::{standard_normal_log_pdf, FlowCache, FlowStack};
