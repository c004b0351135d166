//! Beta-Bernoulli machinery: pseudo-counts from class-conditional densities,
//! conjugate updates, prior injection, and credible intervals.

mod beta;
mod counts;
mod report;

pub use beta::{beta_cdf, beta_update, credible_interval, BetaPosterior, CredibleInterval};
pub use counts::{
    mc_count_estimate, pseudo_counts, CountMode, McCountEstimate, PseudoCounts, COUNT_CEILING,
    LOG_COUNT_FLOOR,
};
pub use report::{posterior_report, ReportConfig, UncertaintyReport};
