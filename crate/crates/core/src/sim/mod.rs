//! Seeded evaluation harness: cost models, system variants, bootstrap
//! summaries, threshold sweeps and the ablation suite.
//!
//! All variants and all threshold cells share one task set and one frozen
//! noise table, so differences between runs come only from path assignment.

mod ablation;
mod cost;
pub mod output;
mod stats;
mod sweep;
mod variant;

pub use ablation::{ablation_suite, AblationReport, AblationRow, Attribution, AttributionRow};
pub use cost::{sample_cost, CostModel, CostSample, Gaussian, Overhead, Path, PathCost};
pub use stats::{bootstrap_ci, bootstrap_ci_with, nearest_rank_percentile, summarize, ConfidenceInterval, Summary, TypeBreakdown};
pub use sweep::{linspace, sensitivity_sweep, SweepCell, SweepFamily, SweepGrids, SweepTable};
pub use variant::{assign_paths, run_variant, SimRecord, SystemVariant, Workload};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("no noise row for task {0}")]
    MissingNoise(usize),
    #[error("cannot summarise an empty record set")]
    EmptyRecords,
    #[error("bootstrap needs at least one value and one resample")]
    EmptyBootstrap,
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}
