//! End-to-end evaluation of a trained density model and baseline on a
//! labelled test set.

use super::{
    filter_by_uncertainty, filtered_roc_comparison, in_set_scores, normalized_log_priors, ratio_test_classify,
    roc_auc, Classification, Partition, ReportRow, ScorerComparison,
};
use crate::bayes::{posterior_report, ReportConfig, UncertaintyReport};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{CccpDeModel, FfnnModel};

/// Scorer names, in output order.
pub const SCORERS: [&str; 3] = ["ffnn", "sigmoid", "ratio"];

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Test rows whose label is a known class, in test order.
    pub in_set: Vec<usize>,
    pub rows: Vec<ReportRow>,
    pub reports: Vec<UncertaintyReport>,
    /// Ratio-test log-odds per in-set row; 0 where no class has support.
    pub ratio_scores: Vec<f64>,
    /// Indices into `in_set`.
    pub partition: Partition,
    /// One entry per name in [`SCORERS`].
    pub comparisons: Vec<ScorerComparison>,
    /// In-set score AUC of known-class rows against out-of-set rows, when
    /// the test set has any.
    pub open_set_auc: Option<f64>,
}

impl Evaluation {
    pub fn scores(&self, scorer: &str) -> Option<Vec<f64>> {
        match scorer {
            "ffnn" => Some(self.rows.iter().map(|r| r.score_ffnn).collect()),
            "sigmoid" => Some(self.rows.iter().map(|r| r.score_sigmoid).collect()),
            "ratio" => Some(self.ratio_scores.clone()),
            _ => None,
        }
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Scores every test row with the baseline, the discriminative head and the
/// ratio test, builds a credible-interval report per row, and compares ROC
/// curves before and after rejecting rows whose interval is wider than
/// `config.threshold`. Rows labelled `>= 2` count as out-of-set.
pub fn evaluate(
    cccpde: &CccpDeModel,
    ffnn: &FfnnModel,
    test: &Dataset,
    config: &ReportConfig,
    threads: usize,
) -> Result<Evaluation> {
    if cccpde.num_classes() != 2 {
        return Err(Error::Unsupported(format!(
            "evaluation covers binary models, got {} classes",
            cccpde.num_classes()
        )));
    }
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let out = cccpde.forward_parallel(&test.features, threads)?;
    let ffnn_scores = ffnn.predict(&test.features)?;
    let log_priors = normalized_log_priors(cccpde.class_priors())?;

    let in_set: Vec<usize> = (0..test.len()).filter(|&i| test.labels[i] < 2).collect();
    let open_set_auc = if in_set.len() < test.len() && !in_set.is_empty() {
        let scores = in_set_scores(&out);
        let known: Vec<usize> = test.labels.iter().map(|&l| usize::from(l < 2)).collect();
        Some(roc_auc(&scores, &known)?.auc)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(in_set.len());
    let mut reports = Vec::with_capacity(in_set.len());
    let mut ratio_scores = Vec::with_capacity(in_set.len());
    for &i in &in_set {
        let logp = out.log_densities.row(i);
        let report = posterior_report(logp, cccpde.class_counts(), config)?;
        ratio_scores.push(match ratio_test_classify(logp, &log_priors)? {
            Classification::Class { score, .. } => score,
            Classification::NoSupport => 0.0,
        });
        rows.push(ReportRow {
            index: i,
            label: test.labels[i],
            score_ffnn: ffnn_scores[i],
            score_sigmoid: out.disc_scores[i],
            logp: [logp[0], logp[1]],
            post_mean: report.mean,
            ci_lo: report.interval.lo,
            ci_hi: report.interval.hi,
            abstain: report.abstain,
        });
        reports.push(report);
    }

    let ranges: Vec<f64> = reports.iter().map(|r| r.interval.range()).collect();
    let partition = filter_by_uncertainty(&ranges, config.threshold)?;
    let labels: Vec<usize> = rows.iter().map(|r| r.label).collect();
    let ffnn_in: Vec<f64> = rows.iter().map(|r| r.score_ffnn).collect();
    let sigmoid_in: Vec<f64> = rows.iter().map(|r| r.score_sigmoid).collect();
    let comparisons = filtered_roc_comparison(
        &labels,
        &[
            (SCORERS[0], &ffnn_in),
            (SCORERS[1], &sigmoid_in),
            (SCORERS[2], &ratio_scores),
        ],
        &partition,
    )?;
    Ok(Evaluation {
        in_set,
        rows,
        reports,
        ratio_scores,
        partition,
        comparisons,
        open_set_auc,
    })
}
