//! Per-sample uncertainty reports for binary problems.

use crate::bayes::{beta_update, credible_interval, pseudo_counts, BetaPosterior, CredibleInterval, PseudoCounts};
use crate::error::{Error, Result};

/// Settings shared by every report in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConfig {
    pub prior: BetaPosterior,
    /// Neighborhood volume turning densities into counts.
    pub volume: f64,
    /// Credible mass, 0.95 by default.
    pub mass: f64,
    /// Interval ranges above this abstain; 0.1 by default.
    pub threshold: f64,
}

impl ReportConfig {
    pub fn new(volume: f64) -> Self {
        Self {
            prior: BetaPosterior::uniform(),
            volume,
            mass: 0.95,
            threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    pub log_densities: Vec<f64>,
    pub counts: PseudoCounts,
    pub posterior: BetaPosterior,
    pub interval: CredibleInterval,
    /// Posterior mean of the positive-class probability.
    pub mean: f64,
    pub abstain: bool,
}

/// Class 1 is the positive class; its pseudo-count adds to `a`, class 0's
/// to `b`.
pub fn posterior_report(
    log_densities: &[f64],
    class_counts: &[f64],
    config: &ReportConfig,
) -> Result<UncertaintyReport> {
    if log_densities.len() != 2 {
        return Err(Error::Unsupported(format!(
            "credible intervals need exactly 2 classes, got {}; multiclass credible regions \
             (Dirichlet-Multinomial) are not implemented",
            log_densities.len()
        )));
    }
    let counts = pseudo_counts(log_densities, class_counts, config.volume)?;
    let posterior = beta_update(config.prior, counts.counts[1], counts.counts[0])?;
    let interval = credible_interval(&posterior, config.mass)?;
    Ok(UncertaintyReport {
        log_densities: log_densities.to_vec(),
        counts,
        mean: posterior.mean(),
        abstain: interval.range() > config.threshold,
        posterior,
        interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_support_returns_prior() {
        let cfg = ReportConfig {
            threshold: 0.5,
            ..ReportConfig::new(1.0)
        };
        let r = posterior_report(&[f64::NEG_INFINITY, f64::NEG_INFINITY], &[50.0, 50.0], &cfg).unwrap();
        assert_eq!(r.posterior, cfg.prior);
        assert!(r.abstain);
    }

    #[test]
    fn one_sided_evidence() {
        let cfg = ReportConfig::new(1.0);
        let r = posterior_report(&[f64::NEG_INFINITY, 500f64.ln()], &[1.0, 1.0], &cfg).unwrap();
        assert!(r.mean > 0.99);
        assert!(r.interval.range() < 0.02);
        assert!(!r.abstain);
    }

    #[test]
    fn symmetric_small_counts_abstain() {
        let cfg = ReportConfig::new(1.0);
        let r = posterior_report(&[2f64.ln(), 2f64.ln()], &[1.0, 1.0], &cfg).unwrap();
        assert!((r.mean - 0.5).abs() < 1e-12);
        assert!(r.abstain);
    }

    #[test]
    fn multiclass_is_unsupported() {
        let err = posterior_report(&[0.0; 3], &[1.0; 3], &ReportConfig::new(1.0)).unwrap_err();
        assert!(err.to_string().contains("Dirichlet"));
    }
}
