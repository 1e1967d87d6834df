use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::config::ConfigError;
use crate::routing::Assignment;
use crate::task::NoiseTable;

/// Execution path a simulated task takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Path {
    Reflex,
    Agent,
    Super,
    Habit,
    CloudBaseline,
    EdgeBaseline,
}

impl Path {
    pub const ALL: [Path; 6] = [Path::Reflex, Path::Agent, Path::Super, Path::Habit, Path::CloudBaseline, Path::EdgeBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Path::Reflex => "reflex",
            Path::Agent => "agent",
            Path::Super => "super",
            Path::Habit => "habit",
            Path::CloudBaseline => "cloud-baseline",
            Path::EdgeBaseline => "edge-baseline",
        }
    }

    /// Noise columns `(latency, energy)` this path reads. Layer paths share
    /// the first pair; baselines use the second.
    fn noise_columns(self) -> (usize, usize) {
        match self {
            Path::CloudBaseline | Path::EdgeBaseline => (2, 3),
            _ => (0, 1),
        }
    }
}

impl From<Assignment> for Path {
    fn from(a: Assignment) -> Self {
        match a {
            Assignment::Reflex => Path::Reflex,
            Assignment::Agent => Path::Agent,
            Assignment::Super => Path::Super,
            Assignment::Habit => Path::Habit,
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Path {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Path::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| ConfigError::CostModel(format!("unknown path `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl Gaussian {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Gaussian { mean, sd }
    }

    fn at(self, z: f64) -> f64 {
        self.mean + self.sd * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCost {
    /// Milliseconds.
    pub latency: Gaussian,
    /// Millijoules.
    pub energy: Gaussian,
    pub calls: u32,
    pub requires_network: bool,
}

/// Constant per-task overhead added before clamping. Zero by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Overhead {
    pub local_latency_ms: f64,
    pub network_latency_ms: f64,
    pub network_energy_mj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub reflex: PathCost,
    pub agent: PathCost,
    #[serde(rename = "super")]
    pub super_layer: PathCost,
    pub habit: PathCost,
    pub cloud_baseline: PathCost,
    pub edge_baseline: PathCost,
    pub overhead: Overhead,
}

const REFLEX: PathCost = PathCost { latency: Gaussian::new(5.5, 1.4), energy: Gaussian::new(0.48, 0.1), calls: 0, requires_network: false };
const AGENT: PathCost = PathCost { latency: Gaussian::new(155.0, 30.0), energy: Gaussian::new(10.2, 2.0), calls: 1, requires_network: false };
const SUPER: PathCost = PathCost { latency: Gaussian::new(1920.0, 280.0), energy: Gaussian::new(40.5, 7.0), calls: 2, requires_network: true };
const HABIT: PathCost = PathCost { latency: Gaussian::new(2.1, 0.5), energy: Gaussian::new(0.09, 0.02), calls: 0, requires_network: false };

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            reflex: REFLEX,
            agent: AGENT,
            super_layer: SUPER,
            habit: HABIT,
            cloud_baseline: PathCost { calls: 1, ..SUPER },
            edge_baseline: AGENT,
            overhead: Overhead::default(),
        }
    }
}

impl CostModel {
    pub fn path(&self, path: Path) -> &PathCost {
        match path {
            Path::Reflex => &self.reflex,
            Path::Agent => &self.agent,
            Path::Super => &self.super_layer,
            Path::Habit => &self.habit,
            Path::CloudBaseline => &self.cloud_baseline,
            Path::EdgeBaseline => &self.edge_baseline,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for p in Path::ALL {
            let c = self.path(p);
            for (what, g) in [("latency", c.latency), ("energy", c.energy)] {
                if !g.mean.is_finite() || !g.sd.is_finite() || g.sd < 0.0 {
                    return Err(ConfigError::CostModel(format!("{p} {what} needs a finite mean and sd >= 0")));
                }
            }
        }
        let o = self.overhead;
        if [o.local_latency_ms, o.network_latency_ms, o.network_energy_mj].iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::CostModel("overheads must be finite".into()));
        }
        if self.cloud_baseline.calls == 0 || self.cloud_baseline.calls > 2 {
            return Err(ConfigError::CostModel("cloud baseline calls must be 1 or 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSample {
    pub latency_ms: f64,
    pub energy_mj: f64,
    pub calls: u32,
    pub requires_network: bool,
}

/// Cost of running task `task_id` on `path`, read from the task's frozen
/// noise row and clamped at zero.
pub fn sample_cost(path: Path, task_id: usize, noise: &NoiseTable, model: &CostModel) -> Result<CostSample, SimError> {
    let (lat_col, en_col) = path.noise_columns();
    let z_lat = noise.get(task_id, lat_col).ok_or(SimError::MissingNoise(task_id))?;
    let z_en = noise.get(task_id, en_col).ok_or(SimError::MissingNoise(task_id))?;
    let c = model.path(path);
    let (lat_extra, en_extra) = if c.requires_network {
        (model.overhead.network_latency_ms, model.overhead.network_energy_mj)
    } else {
        (model.overhead.local_latency_ms, 0.0)
    };
    Ok(CostSample {
        latency_ms: (c.latency.at(z_lat) + lat_extra).max(0.0),
        energy_mj: (c.energy.at(z_en) + en_extra).max(0.0),
        calls: c.calls,
        requires_network: c.requires_network,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{presample_noise, RngStreams};

    #[test]
    fn zero_noise_gives_means() {
        let noise = NoiseTable::from_rows(&[vec![0.0; 4]]).unwrap();
        let s = sample_cost(Path::Reflex, 0, &noise, &CostModel::default()).unwrap();
        assert_eq!((s.latency_ms, s.energy_mj, s.calls, s.requires_network), (5.5, 0.48, 0, false));
    }

    #[test]
    fn strongly_negative_draw_clamps_to_zero() {
        let noise = NoiseTable::from_rows(&[vec![-10.0; 4]]).unwrap();
        let s = sample_cost(Path::Reflex, 0, &noise, &CostModel::default()).unwrap();
        assert_eq!(s.latency_ms, (5.5f64 - 14.0).max(0.0));
        assert_eq!(s.latency_ms, 0.0);
        assert_eq!(s.energy_mj, 0.0);
    }

    #[test]
    fn overhead_is_added_per_network_class() {
        let noise = NoiseTable::from_rows(&[vec![0.0; 4]]).unwrap();
        let m =
            CostModel { overhead: Overhead { local_latency_ms: 20.0, network_latency_ms: 226.0, network_energy_mj: 5.6 }, ..CostModel::default() };
        let a = sample_cost(Path::Agent, 0, &noise, &m).unwrap();
        assert_eq!((a.latency_ms, a.energy_mj), (175.0, 10.2));
        let c = sample_cost(Path::CloudBaseline, 0, &noise, &m).unwrap();
        assert_eq!((c.latency_ms, c.energy_mj), (2146.0, 46.1));
    }

    #[test]
    fn super_path_needs_network_and_two_calls() {
        let noise = presample_noise(1, 4, &RngStreams::default());
        let s = sample_cost(Path::Super, 0, &noise, &CostModel::default()).unwrap();
        assert_eq!((s.calls, s.requires_network), (2, true));
        let s = sample_cost(Path::CloudBaseline, 0, &noise, &CostModel::default()).unwrap();
        assert_eq!((s.calls, s.requires_network), (1, true));
        assert_eq!(sample_cost(Path::Agent, 5, &noise, &CostModel::default()), Err(SimError::MissingNoise(5)));
    }

    #[test]
    fn unknown_path_name_is_config_error() {
        assert!(matches!("warp".parse::<Path>(), Err(ConfigError::CostModel(_))));
        assert_eq!("cloud-baseline".parse::<Path>().unwrap(), Path::CloudBaseline);
    }

    #[test]
    fn layer_paths_share_noise_columns() {
        let noise = presample_noise(10, 4, &RngStreams::default());
        let m = CostModel::default();
        for id in 0..10 {
            let r = sample_cost(Path::Reflex, id, &noise, &m).unwrap();
            let a = sample_cost(Path::Agent, id, &noise, &m).unwrap();
            let zr = (r.latency_ms - 5.5) / 1.4;
            let za = (a.latency_ms - 155.0) / 30.0;
            assert!((zr - za).abs() < 1e-9);
        }
    }
}
