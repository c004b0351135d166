use crate::error::{Error, Result};
use crate::model::CccpDeOutput;

/// Outcome of the prior-weighted likelihood ratio test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    Class {
        class: usize,
        /// For two classes, `(ln p₁ + ln π₁) − (ln p₀ + ln π₀)`; otherwise
        /// the margin of the winner over the runner-up.
        score: f64,
    },
    /// Every class-conditional density is zero.
    NoSupport,
}

impl Classification {
    pub fn class(self) -> Option<usize> {
        match self {
            Classification::Class { class, .. } => Some(class),
            Classification::NoSupport => None,
        }
    }
}

/// `ln π_k` after normalizing `priors` to sum to one.
pub fn normalized_log_priors(priors: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = priors.iter().sum();
    if priors.iter().any(|p| !(*p >= 0.0)) || !(total > 0.0) || !total.is_finite() {
        return Err(Error::Domain(format!("invalid class priors {priors:?}")));
    }
    Ok(priors.iter().map(|p| (p / total).ln()).collect())
}

/// `argmax_k (ln p_k + ln π_k)`, ties going to the lower index.
pub fn ratio_test_classify(log_densities: &[f64], log_priors: &[f64]) -> Result<Classification> {
    if log_densities.len() != log_priors.len() || log_densities.len() < 2 {
        return Err(Error::shape(
            "ratio_test_classify",
            (log_densities.len(), 1),
            (log_priors.len(), 1),
        ));
    }
    if log_densities.iter().chain(log_priors).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN log-density or log-prior".into()));
    }
    if log_densities.iter().all(|&v| v == f64::NEG_INFINITY) {
        return Ok(Classification::NoSupport);
    }
    let weighted: Vec<f64> = log_densities.iter().zip(log_priors).map(|(d, p)| d + p).collect();
    let mut best = 0;
    for k in 1..weighted.len() {
        if weighted[k] > weighted[best] {
            best = k;
        }
    }
    let score = if weighted.len() == 2 {
        weighted[1] - weighted[0]
    } else {
        let runner_up = weighted
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != best)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        weighted[best] - runner_up
    };
    Ok(Classification::Class { class: best, score })
}

/// `max_k ln p_k(x)`: high for inputs near the training data.
pub fn in_set_score(log_densities: &[f64]) -> f64 {
    log_densities.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn in_set_scores(output: &CccpDeOutput) -> Vec<f64> {
    let m = &output.log_densities;
    (0..m.rows()).map(|i| in_set_score(m.row(i))).collect()
}
