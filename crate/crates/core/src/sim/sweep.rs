use serde::{Deserialize, Serialize};

use super::cost::CostModel;
use super::variant::{run_variant, SystemVariant, Workload};
use super::{par_map, SimError};
use crate::routing::Thresholds;

/// `count` evenly spaced values from `lo` to `hi` inclusive, rounded to 12
/// decimals so grid labels print cleanly.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| round12(lo + (hi - lo) * i as f64 / (count - 1) as f64)).collect(),
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrids {
    pub tau_r: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub tau_a: Vec<f64>,
    pub gamma_a: Vec<f64>,
}

impl Default for SweepGrids {
    fn default() -> Self {
        SweepGrids {
            tau_r: linspace(0.10, 0.40, 10),
            gamma_r: vec![0.20, 0.25, 0.30, 0.35, 0.40],
            tau_a: linspace(0.50, 0.90, 10),
            gamma_a: vec![0.60, 0.65, 0.70, 0.75, 0.80],
        }
    }
}

/// Which slice of the grid a cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    /// Reflex urgency × reflex complexity, agent thresholds at base values.
    Reflex,
    /// Agent urgency × agent complexity, reflex thresholds at base values.
    Agent,
    /// Reflex urgency × agent urgency at base complexity thresholds.
    Heatmap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub family: SweepFamily,
    pub thresholds: Thresholds,
    pub mean_latency_ms: f64,
    pub mean_energy_mj: f64,
    pub mean_calls: f64,
    pub offline_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variant: SystemVariant,
    pub base: Thresholds,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn family(&self, family: SweepFamily) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(move |c| c.family == family)
    }

    pub fn worst_latency(&self, family: Option<SweepFamily>) -> Option<&SweepCell> {
        self.cells.iter().filter(|c| family.is_none_or(|f| c.family == f)).max_by(|a, b| a.mean_latency_ms.total_cmp(&b.mean_latency_ms))
    }
}

/// Evaluates the main configuration (threshold routing, habit disabled) over
/// every grid cell. All cells read the workload's shared noise table, so only
/// path assignment differs between them.
pub fn sensitivity_sweep(workload: &Workload, grids: &SweepGrids, base: &Thresholds, model: &CostModel) -> Result<SweepTable, SimError> {
    let mut configs = Vec::new();
    for &gamma_r in &grids.gamma_r {
        for &tau_r in &grids.tau_r {
            configs.push((SweepFamily::Reflex, Thresholds { reflex_urgency: tau_r, reflex_complexity: gamma_r, ..*base }));
        }
    }
    for &gamma_a in &grids.gamma_a {
        for &tau_a in &grids.tau_a {
            configs.push((SweepFamily::Agent, Thresholds { agent_urgency: tau_a, agent_complexity: gamma_a, ..*base }));
        }
    }
    for &tau_a in &grids.tau_a {
        for &tau_r in &grids.tau_r {
            configs.push((SweepFamily::Heatmap, Thresholds { reflex_urgency: tau_r, agent_urgency: tau_a, ..*base }));
        }
    }
    for (_, th) in &configs {
        th.validate()?;
    }
    let variant = SystemVariant::TsMainNoHabit;
    let cells = par_map(&configs, |(family, th)| -> Result<SweepCell, SimError> {
        let records = run_variant(workload, variant, th, model)?;
        let n = records.len() as f64;
        Ok(SweepCell {
            family: *family,
            thresholds: *th,
            mean_latency_ms: records.iter().map(|r| r.latency_ms).sum::<f64>() / n,
            mean_energy_mj: records.iter().map(|r| r.energy_mj).sum::<f64>() / n,
            mean_calls: records.iter().map(|r| f64::from(r.calls)).sum::<f64>() / n,
            offline_pct: 100.0 * records.iter().filter(|r| r.offline_ok).count() as f64 / n,
        })
    });
    Ok(SweepTable { variant, base: *base, cells: cells.into_iter().collect::<Result<_, _>>()? })
}
