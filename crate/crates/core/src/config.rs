//! Run configuration: one TOML file, overridable from the command line, and
//! echoed verbatim into every output for provenance.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::habit::HabitWeights;
use crate::routing::Thresholds;
use crate::sim::{CostModel, SystemVariant};
use crate::task::{Mixture, RngStreams};

/// A violated configuration constraint. The message names the constraint.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid mixture: {0}")]
    Mixture(String),
    #[error("the workload must contain at least one task (n > 0)")]
    EmptyWorkload,
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
    #[error("invalid habit weights: {0}")]
    HabitWeights(String),
    #[error("invalid gate configuration: {0}")]
    Gate(String),
    #[error("invalid trade-off coefficients: {0}")]
    Coefficients(String),
    #[error("invalid cost model: {0}")]
    CostModel(String),
    #[error("unknown system variant `{0}`")]
    Variant(String),
    #[error("bootstrap resamples must be at least 1")]
    Resamples,
    #[error("cannot parse config: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: RngStreams,
    pub n_tasks: usize,
    pub mixture: Mixture,
    pub bootstrap_resamples: usize,
    pub thresholds: Thresholds,
    pub habit: HabitWeights,
    pub cost: CostModel,
    /// Variant used by `simulate`; the other subcommands ignore it.
    pub variant: SystemVariant,
    /// Output directory; `None` means `./out/<subcommand>-<seed>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seeds: RngStreams::default(),
            n_tasks: 2000,
            mixture: Mixture::default(),
            bootstrap_resamples: 2000,
            thresholds: Thresholds::default(),
            habit: HabitWeights::default(),
            cost: CostModel::default(),
            variant: SystemVariant::TsMainNoHabit,
            out: None,
            format: OutputFormat::Both,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Compact single-line JSON used for the provenance header of outputs.
    /// The output directory is omitted so moving outputs does not change them.
    pub fn provenance_json(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        serde_json::to_string(&c).expect("config is always representable as JSON")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_tasks == 0 {
            return Err(ConfigError::EmptyWorkload);
        }
        if self.bootstrap_resamples == 0 {
            return Err(ConfigError::Resamples);
        }
        self.thresholds.validate()?;
        self.habit.validate()?;
        self.cost.validate()
    }
}
