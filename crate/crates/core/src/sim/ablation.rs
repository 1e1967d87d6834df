use serde::{Deserialize, Serialize};

use super::cost::CostModel;
use super::stats::{summarize, Summary};
use super::variant::{run_variant, SystemVariant, Workload};
use super::{par_map, SimError};
use crate::routing::Thresholds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: SystemVariant,
    pub summary: Summary,
}

/// Saving attributed to one component: the mean difference between the
/// variant lacking it and the variant that has it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub component: String,
    pub without: SystemVariant,
    pub with: SystemVariant,
    pub delta_latency_ms: f64,
    /// Latency saving as a percentage of the cloud baseline mean.
    pub pct_of_cloud: f64,
    pub delta_energy_mj: f64,
    pub delta_calls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub cloud_mean_latency_ms: f64,
    pub rows: Vec<AttributionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub attribution: Attribution,
}

impl AblationReport {
    pub fn summary(&self, variant: SystemVariant) -> &Summary {
        &self.rows.iter().find(|r| r.variant == variant).expect("every variant is simulated").summary
    }
}

/// Runs every variant on the shared workload and decomposes the latency gap.
pub fn ablation_suite(workload: &Workload, th: &Thresholds, model: &CostModel, resamples: usize) -> Result<AblationReport, SimError> {
    let bootstrap_seed = workload.streams.bootstrap_seed;
    let rows = par_map(&SystemVariant::ALL, |&variant| -> Result<AblationRow, SimError> {
        let records = run_variant(workload, variant, th, model)?;
        Ok(AblationRow { variant, summary: summarize(&records, resamples, bootstrap_seed)? })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let get = |v: SystemVariant| &rows.iter().find(|r| r.variant == v).unwrap().summary;
    let cloud = get(SystemVariant::CloudCentric).latency_ms.mean;
    let component = |name: &str, without: SystemVariant, with: SystemVariant| {
        let (a, b) = (get(without), get(with));
        let delta = a.latency_ms.mean - b.latency_ms.mean;
        AttributionRow {
            component: name.to_string(),
            without,
            with,
            delta_latency_ms: delta,
            pct_of_cloud: 100.0 * delta / cloud,
            delta_energy_mj: a.energy_mj.mean - b.energy_mj.mean,
            delta_calls: a.calls.mean - b.calls.mean,
        }
    };
    use SystemVariant::*;
    let attribution = Attribution {
        cloud_mean_latency_ms: cloud,
        rows: vec![
            component("local-execution", CloudCentric, TsLocalOnly),
            component("reflex", TsNoReflex, TsFull),
            component("habit", TsNoHabit, TsFull),
            component("routing", TsRandomRoute, TsFull),
            component("total", CloudCentric, TsFull),
        ],
    };
    Ok(AblationReport { rows, attribution })
}
