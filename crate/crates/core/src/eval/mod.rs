//! Classification and uncertainty evaluation.

mod classify;
mod export;
mod filter;
mod grid;
mod pipeline;
mod roc;

pub use classify::{in_set_score, in_set_scores, normalized_log_priors, ratio_test_classify, Classification};
pub use export::{write_density_grid, write_reports, write_roc_curves, ReportRow, REPORT_HEADER};
pub use filter::{filter_by_uncertainty, filtered_roc_comparison, random_rejection_auc, Partition, ScorerComparison};
pub use grid::{density_grid, DensityGrid, GridBounds};
pub use pipeline::{evaluate, Evaluation, SCORERS};
pub use roc::{roc_auc, RocCurve, RocPoint};
