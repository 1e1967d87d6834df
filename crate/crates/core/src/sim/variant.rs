use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cost::{sample_cost, CostModel, Path};
use super::SimError;
use crate::config::ConfigError;
use crate::routing::{quality_penalty, route, route_with_habit, Assignment, NoHabits, ObjectiveTerms, Thresholds};
use crate::task::{presample_noise, sample_tasks, Mixture, NoiseTable, RngStreams, Stream, Task, TaskType, NOISE_DIMS};

/// Class key with a deployed habit policy in the habit-enabled variants.
const HABIT_CLASS: &str = "C";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemVariant {
    /// Every task on the cloud model.
    CloudCentric,
    /// Every task on the on-device model.
    EdgeOnly,
    /// Threshold routing without habits; Super-routed work falls back to Agent.
    TsLocalOnly,
    /// TS-Full's per-path counts, assigned to tasks at random.
    TsRandomRoute,
    /// TS-Full with Reflex-routed work moved to Agent.
    TsNoReflex,
    /// Threshold routing, habit disabled.
    TsNoHabit,
    /// Threshold routing plus habit policies for the repeated class.
    TsFull,
    /// The main-results configuration: threshold routing, habit disabled.
    TsMainNoHabit,
}

impl SystemVariant {
    pub const ALL: [SystemVariant; 8] = [
        SystemVariant::CloudCentric,
        SystemVariant::EdgeOnly,
        SystemVariant::TsLocalOnly,
        SystemVariant::TsRandomRoute,
        SystemVariant::TsNoReflex,
        SystemVariant::TsNoHabit,
        SystemVariant::TsFull,
        SystemVariant::TsMainNoHabit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemVariant::CloudCentric => "cloud-centric",
            SystemVariant::EdgeOnly => "edge-only",
            SystemVariant::TsLocalOnly => "ts-local-only",
            SystemVariant::TsRandomRoute => "ts-random-route",
            SystemVariant::TsNoReflex => "ts-no-reflex",
            SystemVariant::TsNoHabit => "ts-no-habit",
            SystemVariant::TsFull => "ts-full",
            SystemVariant::TsMainNoHabit => "ts-main-no-habit",
        }
    }
}

impl fmt::Display for SystemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemVariant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SystemVariant::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| ConfigError::Variant(s.to_string()))
    }
}

/// Task set plus the frozen noise table every run reads from.
#[derive(Debug, Clone)]
pub struct Workload {
    pub tasks: Vec<Task>,
    pub noise: NoiseTable,
    pub streams: RngStreams,
}

impl Workload {
    pub fn generate(n: usize, mixture: &Mixture, streams: RngStreams) -> Result<Self, ConfigError> {
        let tasks = sample_tasks(n, mixture, &streams)?;
        Ok(Workload::from_tasks(tasks, streams))
    }

    /// Wraps an existing task set; noise rows are indexed by task id.
    pub fn from_tasks(tasks: Vec<Task>, streams: RngStreams) -> Self {
        let rows = tasks.iter().map(|t| t.id + 1).max().unwrap_or(1);
        let noise = presample_noise(rows, NOISE_DIMS, &streams);
        Workload { tasks, noise, streams }
    }
}

/// Outcome of one simulated task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub task_id: usize,
    pub kind: TaskType,
    pub path: Path,
    pub latency_ms: f64,
    pub energy_mj: f64,
    pub calls: u32,
    pub offline_ok: bool,
    pub quality_penalty: f64,
}

impl ObjectiveTerms for SimRecord {
    fn latency_ms(&self) -> f64 {
        self.latency_ms
    }
    fn energy_mj(&self) -> f64 {
        self.energy_mj
    }
    fn quality_penalty(&self) -> f64 {
        self.quality_penalty
    }
}

fn habit_registry(class_key: &str) -> bool {
    class_key == HABIT_CLASS
}

/// Path chosen for every task under `variant`, in task order.
pub fn assign_paths(workload: &Workload, variant: SystemVariant, th: &Thresholds) -> Vec<Path> {
    let tasks = &workload.tasks;
    let full = || -> Vec<Path> { tasks.iter().map(|t| route_with_habit(t, t.kind.class_key(), &habit_registry, th).into()).collect() };
    match variant {
        SystemVariant::CloudCentric => vec![Path::CloudBaseline; tasks.len()],
        SystemVariant::EdgeOnly => vec![Path::EdgeBaseline; tasks.len()],
        SystemVariant::TsLocalOnly => tasks
            .iter()
            .map(|t| match route(t, th) {
                Assignment::Super => Path::Agent,
                a => a.into(),
            })
            .collect(),
        SystemVariant::TsRandomRoute => {
            let mut paths = full();
            paths.shuffle(&mut workload.streams.rng(Stream::Shuffle));
            paths
        }
        SystemVariant::TsNoReflex => full().into_iter().map(|p| if p == Path::Reflex { Path::Agent } else { p }).collect(),
        SystemVariant::TsNoHabit | SystemVariant::TsMainNoHabit => {
            tasks.iter().map(|t| route_with_habit(t, t.kind.class_key(), &NoHabits, th).into()).collect()
        }
        SystemVariant::TsFull => full(),
    }
}

pub fn run_variant(workload: &Workload, variant: SystemVariant, th: &Thresholds, model: &CostModel) -> Result<Vec<SimRecord>, SimError> {
    th.validate()?;
    assign_paths(workload, variant, th)
        .into_iter()
        .zip(&workload.tasks)
        .map(|(path, task)| {
            let cost = sample_cost(path, task.id, &workload.noise, model)?;
            let on_cloud_model = matches!(path, Path::Super | Path::CloudBaseline);
            Ok(SimRecord {
                task_id: task.id,
                kind: task.kind,
                path,
                latency_ms: cost.latency_ms,
                energy_mj: cost.energy_mj,
                calls: cost.calls,
                offline_ok: !cost.requires_network,
                quality_penalty: quality_penalty(task.kind, on_cloud_model),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn workload() -> Workload {
        Workload::generate(2000, &Mixture::default(), RngStreams::default()).unwrap()
    }

    fn fraction(records: &[SimRecord], path: Path) -> f64 {
        records.iter().filter(|r| r.path == path).count() as f64 / records.len() as f64
    }

    #[test]
    fn edge_only_mean_latency_matches_agent_distribution() {
        let w = workload();
        let r = run_variant(&w, SystemVariant::EdgeOnly, &Thresholds::default(), &CostModel::default()).unwrap();
        let mean = r.iter().map(|r| r.latency_ms).sum::<f64>() / r.len() as f64;
        assert!((mean - 155.0).abs() <= 2.0, "mean {mean}");
        assert!(r.iter().all(|r| r.offline_ok));
    }

    #[test]
    fn cloud_centric_is_never_offline() {
        let w = workload();
        let r = run_variant(&w, SystemVariant::CloudCentric, &Thresholds::default(), &CostModel::default()).unwrap();
        assert!(r.iter().all(|r| !r.offline_ok && r.calls == 1));
    }

    #[test]
    fn full_variant_path_fractions() {
        let w = workload();
        let r = run_variant(&w, SystemVariant::TsFull, &Thresholds::default(), &CostModel::default()).unwrap();
        // Analytic path probabilities from the mixture weights and the
        // uniform (urgency, complexity) boxes under the default thresholds.
        let reflex_given_a = (0.25 / 0.28) * (0.30 / 0.35);
        let agent_given_b = ((0.70 - 0.25) / 0.75) * ((0.75 - 0.55) / 0.45);
        let expected = [
            (Path::Reflex, 0.6 * reflex_given_a),
            (Path::Habit, 0.1),
            (Path::Agent, 0.6 * (1.0 - reflex_given_a) + 0.3 * agent_given_b),
            (Path::Super, 0.3 * (1.0 - agent_given_b)),
        ];
        for (path, p) in expected {
            let f = fraction(&r, path);
            let se = (p * (1.0 - p) / r.len() as f64).sqrt();
            assert!((f - p).abs() <= 3.0 * se, "{path}: {f} vs analytic {p}");
        }
    }

    #[test]
    fn random_route_preserves_counts() {
        let w = workload();
        let th = Thresholds::default();
        let full = assign_paths(&w, SystemVariant::TsFull, &th);
        let random = assign_paths(&w, SystemVariant::TsRandomRoute, &th);
        let mut a = full.clone();
        let mut b = random.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_ne!(full, random);
    }

    #[test]
    fn local_only_never_needs_network() {
        let w = workload();
        let r = run_variant(&w, SystemVariant::TsLocalOnly, &Thresholds::default(), &CostModel::default()).unwrap();
        assert!(r.iter().all(|r| r.offline_ok));
        assert_eq!(fraction(&r, Path::Habit), 0.0);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in SystemVariant::ALL {
            assert_eq!(v.as_str().parse::<SystemVariant>().unwrap(), v);
        }
        assert!(matches!("ts-bogus".parse::<SystemVariant>(), Err(ConfigError::Variant(_))));
    }
}
