//! Binary cross-entropy and heteroscedastic Gaussian negative log-likelihood.

use std::f64::consts::PI;

pub const PROB_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy and its gradient with respect to `p`.
///
/// Probabilities are clamped to `[1e-7, 1 - 1e-7]` before taking logs.
pub fn bce_loss(p: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    assert_eq!(p.len(), y.len(), "bce_loss: {} predictions vs {} labels", p.len(), y.len());
    let n = p.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(p.len());
    for (&pi, &yi) in p.iter().zip(y) {
        let pc = pi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= yi * pc.ln() + (1.0 - yi) * (1.0 - pc).ln();
        grad.push((-(yi / pc) + (1.0 - yi) / (1.0 - pc)) / n);
    }
    (loss / n, grad)
}

/// Gradients of [`gaussian_nll_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNllGrads {
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
}

/// Mean of `ln √(2πσ²) + (y − μ)² / 2σ²` with `σ² = exp(log_var)`.
pub fn gaussian_nll_loss(mu: &[f64], log_var: &[f64], y: &[f64]) -> (f64, GaussianNllGrads) {
    assert!(
        mu.len() == log_var.len() && mu.len() == y.len(),
        "gaussian_nll_loss: length mismatch"
    );
    let n = mu.len() as f64;
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let mut loss = 0.0;
    let mut g_mu = Vec::with_capacity(mu.len());
    let mut g_lv = Vec::with_capacity(mu.len());
    for ((&m, &lv), &yi) in mu.iter().zip(log_var).zip(y) {
        let inv_var = (-lv).exp();
        let r = yi - m;
        loss += half_ln_2pi + 0.5 * lv + 0.5 * r * r * inv_var;
        g_mu.push(-r * inv_var / n);
        g_lv.push((0.5 - 0.5 * r * r * inv_var) / n);
    }
    (
        loss / n,
        GaussianNllGrads {
            mu: g_mu,
            log_var: g_lv,
        },
    )
}
