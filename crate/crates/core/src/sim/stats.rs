use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cost::Path;
use super::variant::SimRecord;
use super::SimError;
use crate::task::{RngStreams, Stream, TaskType};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Percentile bootstrap of the mean with `resamples` draws, seeded directly.
pub fn bootstrap_ci(values: &[f64], resamples: usize, seed: u64) -> Result<ConfidenceInterval, SimError> {
    bootstrap_ci_with(values, resamples, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Percentile bootstrap of the mean: the interval is the 2.5th and 97.5th
/// percentiles (linear interpolation) of the resampled means.
pub fn bootstrap_ci_with<R: Rng + ?Sized>(values: &[f64], resamples: usize, rng: &mut R) -> Result<ConfidenceInterval, SimError> {
    if values.is_empty() || resamples == 0 {
        return Err(SimError::EmptyBootstrap);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut means: Vec<f64> = (0..resamples).map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64).collect();
    means.sort_by(f64::total_cmp);
    Ok(ConfidenceInterval { mean, lo: interpolated_percentile(&means, 2.5), hi: interpolated_percentile(&means, 97.5) })
}

fn interpolated_percentile(sorted: &[f64], pct: f64) -> f64 {
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Value at rank `ceil(p/100 * n)` of the sorted input.
pub fn nearest_rank_percentile(values: &[f64], pct: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeBreakdown {
    pub n: usize,
    pub mean_latency_ms: f64,
    pub mean_energy_mj: f64,
    pub mean_calls: f64,
    pub offline_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub latency_ms: ConfidenceInterval,
    pub p95_latency_ms: f64,
    pub energy_mj: ConfidenceInterval,
    pub calls: ConfidenceInterval,
    pub offline_pct: f64,
    pub quality_penalty_rate: f64,
    /// Percentage of tasks per path; paths that were never used are omitted.
    pub path_pct: BTreeMap<Path, f64>,
    pub per_type: BTreeMap<TaskType, TypeBreakdown>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Aggregates records. Each metric's interval uses its own substream of the
/// bootstrap seed, so the result depends only on the records and the seed.
pub fn summarize(records: &[SimRecord], resamples: usize, bootstrap_seed: u64) -> Result<Summary, SimError> {
    if records.is_empty() {
        return Err(SimError::EmptyRecords);
    }
    let streams = RngStreams::new(0, bootstrap_seed);
    let latency: Vec<f64> = records.iter().map(|r| r.latency_ms).collect();
    let energy: Vec<f64> = records.iter().map(|r| r.energy_mj).collect();
    let calls: Vec<f64> = records.iter().map(|r| f64::from(r.calls)).collect();
    let ci = |values: &[f64], metric: u64| bootstrap_ci_with(values, resamples, &mut streams.rng(Stream::Bootstrap(metric)));
    let n = records.len();
    let pct = |count: usize| 100.0 * count as f64 / n as f64;

    let mut path_counts: BTreeMap<Path, usize> = BTreeMap::new();
    for r in records {
        *path_counts.entry(r.path).or_default() += 1;
    }
    let mut per_type = BTreeMap::new();
    for kind in TaskType::ALL {
        let group: Vec<&SimRecord> = records.iter().filter(|r| r.kind == kind).collect();
        if group.is_empty() {
            continue;
        }
        per_type.insert(
            kind,
            TypeBreakdown {
                n: group.len(),
                mean_latency_ms: mean(group.iter().map(|r| r.latency_ms)),
                mean_energy_mj: mean(group.iter().map(|r| r.energy_mj)),
                mean_calls: mean(group.iter().map(|r| f64::from(r.calls))),
                offline_pct: 100.0 * group.iter().filter(|r| r.offline_ok).count() as f64 / group.len() as f64,
            },
        );
    }
    Ok(Summary {
        n,
        latency_ms: ci(&latency, 0)?,
        p95_latency_ms: nearest_rank_percentile(&latency, 95.0).unwrap(),
        energy_mj: ci(&energy, 1)?,
        calls: ci(&calls, 2)?,
        offline_pct: pct(records.iter().filter(|r| r.offline_ok).count()),
        quality_penalty_rate: mean(records.iter().map(|r| r.quality_penalty)),
        path_pct: path_counts.into_iter().map(|(p, c)| (p, pct(c))).collect(),
        per_type,
    })
}
