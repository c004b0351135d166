//! Credible-interval filtering and before/after ROC comparisons.

use super::{roc_auc, RocCurve};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Disjoint, exhaustive split of sample indices, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub retained: Vec<usize>,
    pub rejected: Vec<usize>,
}

/// Rejects samples whose credible-interval range exceeds `threshold`.
pub fn filter_by_uncertainty(ranges: &[f64], threshold: f64) -> Result<Partition> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidConfig(format!("threshold {threshold} must be positive")));
    }
    let (rejected, retained): (Vec<usize>, Vec<usize>) =
        (0..ranges.len()).partition(|&i| ranges[i].is_nan() || ranges[i] > threshold);
    Ok(Partition { retained, rejected })
}

/// One scorer's ROC on all samples and on the retained samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerComparison {
    pub name: String,
    pub full: RocCurve,
    /// `None` when the retained samples hold only one class.
    pub retained: Option<RocCurve>,
}

impl ScorerComparison {
    /// Retained-set AUC minus full-set AUC.
    pub fn auc_gain(&self) -> Option<f64> {
        self.retained.as_ref().map(|r| r.auc - self.full.auc)
    }
}

/// Applies the same retained index set to every named scorer.
pub fn filtered_roc_comparison(
    labels: &[usize],
    scorers: &[(&str, &[f64])],
    partition: &Partition,
) -> Result<Vec<ScorerComparison>> {
    let n = labels.len();
    if partition.retained.len() + partition.rejected.len() != n
        || partition.retained.iter().chain(&partition.rejected).any(|&i| i >= n)
    {
        return Err(Error::InvalidConfig("partition does not cover the labels".into()));
    }
    let kept_labels: Vec<usize> = partition.retained.iter().map(|&i| labels[i]).collect();
    let both = kept_labels.contains(&0) && kept_labels.contains(&1);
    scorers
        .iter()
        .map(|&(name, scores)| {
            if scores.len() != n {
                return Err(Error::shape("filtered_roc_comparison", (scores.len(), 1), (n, 1)));
            }
            let full = roc_auc(scores, labels)?;
            let retained = if both {
                let kept: Vec<f64> = partition.retained.iter().map(|&i| scores[i]).collect();
                Some(roc_auc(&kept, &kept_labels)?)
            } else {
                None
            };
            Ok(ScorerComparison {
                name: name.to_string(),
                full,
                retained,
            })
        })
        .collect()
}

/// AUC after discarding `n_reject` uniformly random samples; the control
/// for credible-set filtering.
pub fn random_rejection_auc(scores: &[f64], labels: &[usize], n_reject: usize, seed: u64) -> Result<f64> {
    if n_reject >= labels.len() {
        return Err(Error::InvalidConfig("cannot reject every sample".into()));
    }
    let mut keep: Vec<usize> = Rng::new(seed).permutation(labels.len())[n_reject..].to_vec();
    keep.sort_unstable();
    let s: Vec<f64> = keep.iter().map(|&i| scores[i]).collect();
    let l: Vec<usize> = keep.iter().map(|&i| labels[i]).collect();
    Ok(roc_auc(&s, &l)?.auc)
}
