//! Synthetic workload generation.
//!
//! Tasks carry two observable attributes: latency urgency `l` (lower means a
//! tighter deadline) and cognitive complexity `c` (higher means more reasoning
//! is required). Both are drawn uniformly from per-type ranges.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Workload category; determines the attribute ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskType {
    /// Type A: short deadline, low complexity.
    #[serde(rename = "A")]
    ReactiveA,
    /// Type B: relaxed deadline, high complexity.
    #[serde(rename = "B")]
    ReasoningB,
    /// Type C: recurring low-complexity patterns, the habit candidates.
    #[serde(rename = "C")]
    RepeatedC,
}

impl TaskType {
    pub const ALL: [TaskType; 3] = [TaskType::ReactiveA, TaskType::ReasoningB, TaskType::RepeatedC];

    /// Half-open range `[lo, hi)` of the latency-urgency attribute.
    pub fn urgency_range(self) -> (f64, f64) {
        match self {
            TaskType::ReactiveA => (0.0, 0.28),
            TaskType::ReasoningB => (0.25, 1.0),
            TaskType::RepeatedC => (0.0, 0.40),
        }
    }

    pub fn complexity_range(self) -> (f64, f64) {
        match self {
            TaskType::ReactiveA => (0.0, 0.35),
            TaskType::ReasoningB => (0.55, 1.0),
            TaskType::RepeatedC => (0.0, 0.45),
        }
    }

    /// Class key used by the habit registry.
    pub fn class_key(self) -> &'static str {
        match self {
            TaskType::ReactiveA => "A",
            TaskType::ReasoningB => "B",
            TaskType::RepeatedC => "C",
        }
    }

    pub fn index(self) -> usize {
        match self {
            TaskType::ReactiveA => 0,
            TaskType::ReasoningB => 1,
            TaskType::RepeatedC => 2,
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.class_key())
    }
}

impl FromStr for TaskType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(TaskType::ReactiveA),
            "B" => Ok(TaskType::ReasoningB),
            "C" => Ok(TaskType::RepeatedC),
            other => Err(format!("unknown task type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub kind: TaskType,
    /// Latency urgency in `[0, 1]`; lower is more urgent.
    pub urgency: f64,
    /// Cognitive complexity in `[0, 1]`.
    pub complexity: f64,
}

impl Task {
    pub fn new(id: usize, kind: TaskType, urgency: f64, complexity: f64) -> Self {
        Task { id, kind, urgency, complexity }
    }
}

/// Type mixture weights, indexed by [`TaskType::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Mixture([f64; 3]);

impl Mixture {
    pub fn new(reactive: f64, reasoning: f64, repeated: f64) -> Result<Self, ConfigError> {
        let weights = [reactive, reasoning, repeated];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ConfigError::Mixture(format!("weights must be finite and non-negative, got {weights:?}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::Mixture(format!("weights must sum to 1, got {sum}")));
        }
        Ok(Mixture(weights))
    }

    pub fn weight(&self, kind: TaskType) -> f64 {
        self.0[kind.index()]
    }

    pub fn weights(&self) -> [f64; 3] {
        self.0
    }

    fn pick(&self, u: f64) -> TaskType {
        let mut acc = 0.0;
        for kind in TaskType::ALL {
            acc += self.0[kind.index()];
            if u < acc {
                return kind;
            }
        }
        // u landed in the rounding gap above the cumulative sum; take the last
        // type that has any weight.
        *TaskType::ALL.iter().rev().find(|k| self.0[k.index()] > 0.0).unwrap()
    }
}

impl Default for Mixture {
    fn default() -> Self {
        Mixture([0.60, 0.30, 0.10])
    }
}

impl TryFrom<[f64; 3]> for Mixture {
    type Error = ConfigError;

    fn try_from(w: [f64; 3]) -> Result<Self, Self::Error> {
        Mixture::new(w[0], w[1], w[2])
    }
}

impl From<Mixture> for [f64; 3] {
    fn from(m: Mixture) -> Self {
        m.0
    }
}

/// Identifies an independent substream of the primary or bootstrap seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Tasks,
    Noise,
    Shuffle,
    /// Bootstrap resampling; the payload separates metrics.
    Bootstrap(u64),
}

/// Seed pair for the whole evaluation. Every random draw in the crate comes
/// from a substream of one of these two seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStreams {
    pub primary_seed: u64,
    pub bootstrap_seed: u64,
}

impl Default for RngStreams {
    fn default() -> Self {
        RngStreams { primary_seed: 42, bootstrap_seed: 99 }
    }
}

impl RngStreams {
    pub fn new(primary_seed: u64, bootstrap_seed: u64) -> Self {
        RngStreams { primary_seed, bootstrap_seed }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let (seed, id) = match stream {
            Stream::Tasks => (self.primary_seed, 0),
            Stream::Noise => (self.primary_seed, 1),
            Stream::Shuffle => (self.primary_seed, 2),
            Stream::Bootstrap(metric) => (self.bootstrap_seed, 16 + metric),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        rng
    }
}

/// Draws `n` tasks. Per task the draw order is: type, urgency, complexity.
pub fn sample_tasks(n: usize, mixture: &Mixture, streams: &RngStreams) -> Result<Vec<Task>, ConfigError> {
    if n == 0 {
        return Err(ConfigError::EmptyWorkload);
    }
    // Re-validate: the tuple field is private but a deserialised value could
    // still have bypassed `new` in the future.
    let mixture = Mixture::new(mixture.0[0], mixture.0[1], mixture.0[2])?;
    let mut rng = streams.rng(Stream::Tasks);
    let tasks = (0..n)
        .map(|id| {
            let kind = mixture.pick(rng.random::<f64>());
            let (l_lo, l_hi) = kind.urgency_range();
            let urgency = l_lo + (l_hi - l_lo) * rng.random::<f64>();
            let (c_lo, c_hi) = kind.complexity_range();
            let complexity = c_lo + (c_hi - c_lo) * rng.random::<f64>();
            Task { id, kind, urgency, complexity }
        })
        .collect();
    Ok(tasks)
}

/// Number of noise columns per task: latency-z and energy-z for the layer
/// paths, then latency-z and energy-z for the baseline paths.
pub const NOISE_DIMS: usize = 4;

/// Frozen per-task standard-normal draws shared by every variant and every
/// threshold configuration. Cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTable {
    rows: usize,
    dims: usize,
    data: Arc<[f64]>,
}

impl NoiseTable {
    /// Builds a table from explicit rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<NoiseTable> {
        let dims = rows.first()?.len();
        if dims == 0 || rows.iter().any(|r| r.len() != dims) {
            return None;
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Some(NoiseTable { rows: rows.len(), dims, data: data.into() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn get(&self, row: usize, dim: usize) -> Option<f64> {
        (row < self.rows && dim < self.dims).then(|| self.data[row * self.dims + dim])
    }

    pub fn row(&self, row: usize) -> Option<&[f64]> {
        (row < self.rows).then(|| &self.data[row * self.dims..(row + 1) * self.dims])
    }

    pub fn column_mean(&self, dim: usize) -> f64 {
        (0..self.rows).map(|r| self.data[r * self.dims + dim]).sum::<f64>() / self.rows as f64
    }
}

/// Samples the `n × dims` noise table, row-major.
pub fn presample_noise(n: usize, dims: usize, streams: &RngStreams) -> NoiseTable {
    assert!(n >= 1 && dims >= 1, "noise table needs at least one row and column");
    let mut rng = streams.rng(Stream::Noise);
    let data: Vec<f64> = (0..n * dims).map(|_| rng.sample(StandardNormal)).collect();
    NoiseTable { rows: n, dims, data: data.into() }
}

const TASK_SET_HEADER: &str = "# trispirit task set v1";

/// Writes tasks as tab-separated lines `id kind urgency complexity`.
///
/// Floats use Rust's shortest round-trip formatting, so reading the text back
/// yields bit-identical attributes.
pub fn write_task_set(tasks: &[Task]) -> String {
    let mut out = String::with_capacity(tasks.len() * 48);
    out.push_str(TASK_SET_HEADER);
    out.push('\n');
    out.push_str("# id\tkind\turgency\tcomplexity\n");
    for t in tasks {
        out.push_str(&format!("{}\t{}\t{:?}\t{:?}\n", t.id, t.kind, t.urgency, t.complexity));
    }
    out
}

#[derive(Debug, thiserror::Error)]
#[error("task set line {line}: {reason}")]
pub struct TaskSetParseError {
    pub line: usize,
    pub reason: String,
}

pub fn read_task_set(text: &str) -> Result<Vec<Task>, TaskSetParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, TASK_SET_HEADER)) => {}
        _ => return Err(TaskSetParseError { line: 1, reason: "missing task set header".into() }),
    }
    let mut tasks = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| TaskSetParseError { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let id = fields[0].parse().map_err(|e| err(format!("id: {e}")))?;
        let kind = fields[1].parse().map_err(err)?;
        let urgency: f64 = fields[2].parse().map_err(|e| err(format!("urgency: {e}")))?;
        let complexity: f64 = fields[3].parse().map_err(|e| err(format!("complexity: {e}")))?;
        if !(0.0..=1.0).contains(&urgency) || !(0.0..=1.0).contains(&complexity) {
            return Err(err("attributes must lie in [0, 1]".into()));
        }
        tasks.push(Task { id, kind, urgency, complexity });
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tasks: &[Task]) -> [usize; 3] {
        let mut c = [0; 3];
        for t in tasks {
            c[t.kind.index()] += 1;
        }
        c
    }

    #[test]
    fn default_mixture_counts_within_three_sigma() {
        let tasks = sample_tasks(2000, &Mixture::default(), &RngStreams::default()).unwrap();
        assert_eq!(tasks.len(), 2000);
        let c = counts(&tasks);
        for (kind, expected_p) in TaskType::ALL.iter().zip([0.6, 0.3, 0.1]) {
            let mean = 2000.0 * expected_p;
            let sigma = (2000.0_f64 * expected_p * (1.0 - expected_p)).sqrt();
            let got = c[kind.index()] as f64;
            assert!((got - mean).abs() <= 3.0 * sigma, "{kind}: {got} vs {mean}±{}", 3.0 * sigma);
        }
    }

    #[test]
    fn degenerate_mixture_yields_only_reactive() {
        let m = Mixture::new(1.0, 0.0, 0.0).unwrap();
        let tasks = sample_tasks(10, &m, &RngStreams::default()).unwrap();
        assert!(tasks.iter().all(|t| t.kind == TaskType::ReactiveA && t.urgency <= 0.28));
    }

    #[test]
    fn reasoning_urgency_mean_matches_uniform_midpoint() {
        let tasks = sample_tasks(2000, &Mixture::default(), &RngStreams::default()).unwrap();
        let b: Vec<f64> = tasks.iter().filter(|t| t.kind == TaskType::ReasoningB).map(|t| t.urgency).collect();
        let mean = b.iter().sum::<f64>() / b.len() as f64;
        assert!((mean - 0.625).abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn invalid_mixtures_are_rejected() {
        assert!(matches!(Mixture::new(0.5, 0.3, 0.1), Err(ConfigError::Mixture(_))));
        assert!(matches!(Mixture::new(1.2, -0.2, 0.0), Err(ConfigError::Mixture(_))));
        assert!(Mixture::new(0.6, 0.3, 0.1).is_ok());
        assert!(matches!(sample_tasks(0, &Mixture::default(), &RngStreams::default()), Err(ConfigError::EmptyWorkload)));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = RngStreams::new(7, 99);
        let a = sample_tasks(500, &Mixture::default(), &s).unwrap();
        let b = sample_tasks(500, &Mixture::default(), &s).unwrap();
        assert_eq!(a, b);
        let c = sample_tasks(500, &Mixture::default(), &RngStreams::new(8, 99)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_columns_are_centred() {
        let noise = presample_noise(2000, 4, &RngStreams::default());
        for d in 0..4 {
            let m = noise.column_mean(d);
            assert!(m.abs() <= 0.08, "column {d} mean {m}");
        }
    }

    #[test]
    fn noise_is_deterministic_and_shaped() {
        let s = RngStreams::default();
        assert_eq!(presample_noise(100, 4, &s), presample_noise(100, 4, &s));
        let one = presample_noise(1, 1, &s);
        assert_eq!((one.rows(), one.dims()), (1, 1));
        assert!(one.get(0, 0).unwrap().is_finite());
        assert!(one.get(1, 0).is_none());
    }

    #[test]
    fn task_set_text_round_trips() {
        let tasks = sample_tasks(50, &Mixture::default(), &RngStreams::default()).unwrap();
        let text = write_task_set(&tasks);
        assert_eq!(read_task_set(&text).unwrap(), tasks);
        assert!(read_task_set("0\tA\t0.1\t0.1\n").is_err());
        let bad = format!("{TASK_SET_HEADER}\n0\tA\t1.5\t0.1\n");
        assert_eq!(read_task_set(&bad).unwrap_err().line, 2);
    }
}
