use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Default sliding-window length, in traces.
pub const DEFAULT_WINDOW: usize = 500;

/// Monotone squashing applied to each score component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Squash {
    #[default]
    Identity,
    /// Logistic curve centred on 0.5.
    Sigmoid { steepness: f64 },
}

impl Squash {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Squash::Identity => x,
            Squash::Sigmoid { steepness } => 1.0 / (1.0 + (-steepness * (x - 0.5)).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HabitWeights {
    #[serde(rename = "w_f")]
    pub frequency: f64,
    #[serde(rename = "w_c")]
    pub consistency: f64,
    #[serde(rename = "w_s")]
    pub similarity: f64,
    /// Promotion threshold; a class is promoted only when its score is
    /// strictly greater.
    #[serde(rename = "delta")]
    pub promote_above: f64,
    #[serde(default)]
    pub squash: Squash,
}

impl Default for HabitWeights {
    fn default() -> Self {
        HabitWeights { frequency: 0.4, consistency: 0.3, similarity: 0.3, promote_above: 0.75, squash: Squash::Identity }
    }
}

impl HabitWeights {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let w = [self.frequency, self.consistency, self.similarity];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(ConfigError::HabitWeights(format!("weights must be non-negative, got {w:?}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::HabitWeights(format!("w_f + w_c + w_s must equal 1, got {sum}")));
        }
        if !self.promote_above.is_finite() {
            return Err(ConfigError::HabitWeights("delta must be finite".into()));
        }
        Ok(())
    }
}

/// Observed regularity of one task class, each component clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskClassStats {
    pub class_key: String,
    pub frequency: f64,
    pub consistency: f64,
    pub similarity: f64,
}

impl TaskClassStats {
    pub fn new(class_key: impl Into<String>, frequency: f64, consistency: f64, similarity: f64) -> Self {
        TaskClassStats {
            class_key: class_key.into(),
            frequency: frequency.clamp(0.0, 1.0),
            consistency: consistency.clamp(0.0, 1.0),
            similarity: similarity.clamp(0.0, 1.0),
        }
    }
}

pub fn habit_score(stats: &TaskClassStats, w: &HabitWeights) -> Result<f64, ConfigError> {
    w.validate()?;
    let s = w.frequency * w.squash.apply(stats.frequency.clamp(0.0, 1.0))
        + w.consistency * w.squash.apply(stats.consistency.clamp(0.0, 1.0))
        + w.similarity * w.squash.apply(stats.similarity.clamp(0.0, 1.0));
    Ok(s.clamp(0.0, 1.0))
}

/// One entry of the trace log: which class ran, when, and in what context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub class_key: String,
    pub timestamp: f64,
    pub context: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub class_key: String,
    pub score: f64,
}

/// Per-class statistics over `window`, sorted by class key.
pub fn class_stats(window: &[TraceEvent]) -> Vec<TaskClassStats> {
    let mut by_class: BTreeMap<&str, Vec<&TraceEvent>> = BTreeMap::new();
    for ev in window {
        by_class.entry(ev.class_key.as_str()).or_default().push(ev);
    }
    let total = window.len() as f64;
    by_class
        .into_iter()
        .map(|(key, events)| {
            let frequency = events.len() as f64 / total;
            TaskClassStats::new(key, frequency, arrival_consistency(&events), mean_cosine(&events))
        })
        .collect()
}

/// `1 - CoV` of inter-arrival gaps. Fewer than two events, or a zero mean
/// gap, give zero.
fn arrival_consistency(events: &[&TraceEvent]) -> f64 {
    if events.len() < 2 {
        return 0.0;
    }
    let mut times: Vec<f64> = events.iter().map(|e| e.timestamp).collect();
    times.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
    (1.0 - var.sqrt() / mean).clamp(0.0, 1.0)
}

fn mean_cosine(events: &[&TraceEvent]) -> f64 {
    let n = events.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            sum += cosine(&events[i].context, &events[j].context);
            pairs += 1;
        }
    }
    (sum / pairs as f64).clamp(0.0, 1.0)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Classes whose score strictly exceeds the promotion threshold.
pub fn detect_candidates(window: &[TraceEvent], w: &HabitWeights) -> Result<Vec<Candidate>, ConfigError> {
    let mut out = Vec::new();
    for stats in class_stats(window) {
        let score = habit_score(&stats, w)?;
        if score > w.promote_above {
            out.push(Candidate { class_key: stats.class_key, score });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(key: &str, t: f64, ctx: &[f64]) -> TraceEvent {
        TraceEvent { class_key: key.into(), timestamp: t, context: ctx.to_vec() }
    }

    #[test]
    fn score_examples() {
        let w = HabitWeights::default();
        assert_eq!(habit_score(&TaskClassStats::new("k", 1.0, 1.0, 1.0), &w).unwrap(), 1.0);
        let s = habit_score(&TaskClassStats::new("k", 0.9, 0.8, 0.7), &w).unwrap();
        assert!((s - 0.81).abs() < 1e-12 && s > w.promote_above);
        let s = habit_score(&TaskClassStats::new("k", 0.5, 0.5, 0.5), &w).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_score_is_not_promoted() {
        // f = 0.6, CoV = 0.2, mean cosine 0.9
        let w = HabitWeights::default();
        let s = habit_score(&TaskClassStats::new("X", 0.6, 1.0 - 0.2, 0.9), &w).unwrap();
        assert_eq!(s, 0.75);
        assert!(s <= w.promote_above);
    }

    #[test]
    fn bad_weights_are_configuration_errors() {
        let w = HabitWeights { frequency: 0.5, ..HabitWeights::default() };
        assert!(matches!(habit_score(&TaskClassStats::new("k", 1.0, 1.0, 1.0), &w), Err(ConfigError::HabitWeights(_))));
    }

    #[test]
    fn sigmoid_squash_is_monotone_and_bounded() {
        let sq = Squash::Sigmoid { steepness: 10.0 };
        let mut prev = 0.0;
        for i in 0..=10 {
            let y = sq.apply(i as f64 / 10.0);
            assert!(y > prev && y < 1.0);
            prev = y;
        }
    }

    #[test]
    fn perfectly_regular_class_is_flagged_with_full_score() {
        let window: Vec<_> = (0..20).map(|i| ev("C", i as f64 * 5.0, &[1.0, 2.0])).collect();
        let cands = detect_candidates(&window, &HabitWeights::default()).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].class_key, "C");
        assert!((cands[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_contexts_cap_the_score_at_point_seven() {
        let window: Vec<_> = (0..3)
            .map(|i| {
                let mut ctx = [0.0; 3];
                ctx[i] = 1.0;
                ev("O", i as f64, &ctx)
            })
            .collect();
        let stats = class_stats(&window);
        assert_eq!(stats[0].similarity, 0.0);
        let s = habit_score(&stats[0], &HabitWeights::default()).unwrap();
        assert!((s - 0.7).abs() < 1e-12);
        assert!(detect_candidates(&window, &HabitWeights::default()).unwrap().is_empty());
    }

    #[test]
    fn single_occurrence_has_zero_consistency() {
        let window = vec![ev("a", 0.0, &[1.0]), ev("b", 1.0, &[1.0]), ev("b", 2.0, &[1.0])];
        let stats = class_stats(&window);
        assert_eq!(stats[0].class_key, "a");
        assert_eq!(stats[0].consistency, 0.0);
        assert!((stats[0].frequency - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats[1].consistency, 1.0);
    }
}
