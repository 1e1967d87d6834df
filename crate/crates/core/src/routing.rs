//! Threshold-based layer selection.
//!
//! A task goes to Reflex when both its urgency and complexity fall below the
//! reflex thresholds, to Agent when both fall below the agent thresholds, and
//! to Super otherwise. Comparisons are strict, so a task sitting exactly on a
//! threshold falls through to the next layer out.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::layer::Layer;
use crate::task::{Task, TaskType};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    #[serde(rename = "tau_r")]
    pub reflex_urgency: f64,
    #[serde(rename = "gamma_r")]
    pub reflex_complexity: f64,
    #[serde(rename = "tau_a")]
    pub agent_urgency: f64,
    #[serde(rename = "gamma_a")]
    pub agent_complexity: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { reflex_urgency: 0.25, reflex_complexity: 0.30, agent_urgency: 0.70, agent_complexity: 0.75 }
    }
}

impl Thresholds {
    pub fn new(reflex_urgency: f64, reflex_complexity: f64, agent_urgency: f64, agent_complexity: f64) -> Result<Self, ConfigError> {
        let th = Thresholds { reflex_urgency, reflex_complexity, agent_urgency, agent_complexity };
        th.validate()?;
        Ok(th)
    }

    /// The reflex band must be nested inside the agent band.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let named =
            [("tau_r", self.reflex_urgency), ("gamma_r", self.reflex_complexity), ("tau_a", self.agent_urgency), ("gamma_a", self.agent_complexity)];
        for (name, v) in named {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Thresholds(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        if self.reflex_urgency > self.agent_urgency {
            return Err(ConfigError::Thresholds(format!("tau_r = {} must not exceed tau_a = {}", self.reflex_urgency, self.agent_urgency)));
        }
        if self.reflex_complexity > self.agent_complexity {
            return Err(ConfigError::Thresholds(format!("gamma_r = {} must not exceed gamma_a = {}", self.reflex_complexity, self.agent_complexity)));
        }
        Ok(())
    }
}

/// Where a task executes. `Habit` means a compiled policy on the Reflex layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assignment {
    Reflex,
    Agent,
    Super,
    Habit,
}

impl Assignment {
    pub const ALL: [Assignment; 4] = [Assignment::Reflex, Assignment::Agent, Assignment::Super, Assignment::Habit];

    /// Physical layer that runs the work.
    pub fn layer(self) -> Layer {
        match self {
            Assignment::Reflex | Assignment::Habit => Layer::Reflex,
            Assignment::Agent => Layer::Agent,
            Assignment::Super => Layer::Super,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Assignment::Reflex => "reflex",
            Assignment::Agent => "agent",
            Assignment::Super => "super",
            Assignment::Habit => "habit",
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Assignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Assignment::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| format!("unknown assignment `{s}`"))
    }
}

pub fn route(task: &Task, th: &Thresholds) -> Assignment {
    if task.urgency < th.reflex_urgency && task.complexity < th.reflex_complexity {
        Assignment::Reflex
    } else if task.urgency < th.agent_urgency && task.complexity < th.agent_complexity {
        Assignment::Agent
    } else {
        Assignment::Super
    }
}

/// Lookup of deployed habit policies by class key.
pub trait PolicyLookup {
    /// True when a deployed, non-invalidated policy exists for `class_key`.
    fn has_deployed(&self, class_key: &str) -> bool;
}

impl<F: Fn(&str) -> bool> PolicyLookup for F {
    fn has_deployed(&self, class_key: &str) -> bool {
        self(class_key)
    }
}

/// Registry containing no policies.
pub struct NoHabits;

impl PolicyLookup for NoHabits {
    fn has_deployed(&self, _: &str) -> bool {
        false
    }
}

/// Routes to `Habit` when the task's class has a live policy, otherwise
/// defers to [`route`].
pub fn route_with_habit<R: PolicyLookup + ?Sized>(task: &Task, class_key: &str, registry: &R, th: &Thresholds) -> Assignment {
    if registry.has_deployed(class_key) {
        Assignment::Habit
    } else {
        route(task, th)
    }
}

/// Weights of the routing objective `L + alpha * E + beta * penalty`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCoefficients {
    pub energy_weight: f64,
    pub quality_weight: f64,
}

impl TradeoffCoefficients {
    pub fn new(energy_weight: f64, quality_weight: f64) -> Result<Self, ConfigError> {
        for (name, v) in [("alpha", energy_weight), ("beta", quality_weight)] {
            if !v.is_finite() || v < 0.0 {
                return Err(ConfigError::Coefficients(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(TradeoffCoefficients { energy_weight, quality_weight })
    }
}

/// Anything that carries the three objective terms for one task.
pub trait ObjectiveTerms {
    fn latency_ms(&self) -> f64;
    fn energy_mj(&self) -> f64;
    fn quality_penalty(&self) -> f64;
}

pub fn objective_cost<R: ObjectiveTerms + ?Sized>(record: &R, coeff: &TradeoffCoefficients) -> f64 {
    record.latency_ms() + coeff.energy_weight * record.energy_mj() + coeff.quality_weight * record.quality_penalty()
}

/// Binary capability penalty: reasoning-heavy tasks lose quality on any
/// local execution path. Everything else is served adequately wherever it
/// lands.
pub fn quality_penalty(kind: TaskType, runs_on_cloud_model: bool) -> f64 {
    if kind == TaskType::ReasoningB && !runs_on_cloud_model {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(l: f64, c: f64) -> Task {
        Task::new(0, TaskType::ReactiveA, l, c)
    }

    #[test]
    fn routes_default_examples() {
        let th = Thresholds::default();
        assert_eq!(route(&task(0.10, 0.20), &th), Assignment::Reflex);
        assert_eq!(route(&task(0.25, 0.10), &th), Assignment::Agent);
        assert_eq!(route(&task(0.95, 0.95), &th), Assignment::Super);
        assert_eq!(route(&task(0.10, 0.30), &th), Assignment::Agent);
        assert_eq!(route(&task(0.70, 0.10), &th), Assignment::Super);
        assert_eq!(route(&task(0.10, 0.75), &th), Assignment::Super);
    }

    #[test]
    fn habit_overrides_only_with_deployed_policy() {
        let th = Thresholds::default();
        let t = Task::new(3, TaskType::RepeatedC, 0.35, 0.2);
        let only_c = |k: &str| k == "C";
        assert_eq!(route_with_habit(&t, "C", &only_c, &th), Assignment::Habit);
        assert_eq!(route_with_habit(&t, "C", &NoHabits, &th), route(&t, &th));
        assert_eq!(route_with_habit(&t, "A", &only_c, &th), Assignment::Agent);
    }

    #[test]
    fn threshold_validation_names_the_constraint() {
        let err = Thresholds::new(0.8, 0.3, 0.7, 0.75).unwrap_err();
        assert!(err.to_string().contains("tau_r"));
        let err = Thresholds::new(0.2, 0.8, 0.7, 0.75).unwrap_err();
        assert!(err.to_string().contains("gamma_r"));
        assert!(Thresholds::new(0.2, 0.3, 1.2, 0.75).is_err());
        assert!(Thresholds::default().validate().is_ok());
    }

    struct Rec(f64, f64, f64);

    impl ObjectiveTerms for Rec {
        fn latency_ms(&self) -> f64 {
            self.0
        }
        fn energy_mj(&self) -> f64 {
            self.1
        }
        fn quality_penalty(&self) -> f64 {
            self.2
        }
    }

    #[test]
    fn objective_examples() {
        let c = TradeoffCoefficients::new(1.0, 5.0).unwrap();
        assert_eq!(objective_cost(&Rec(100.0, 10.0, 0.0), &c), 110.0);
        let zero = TradeoffCoefficients::new(0.0, 0.0).unwrap();
        assert_eq!(objective_cost(&Rec(100.0, 10.0, 1.0), &zero), 100.0);
        assert!(TradeoffCoefficients::new(-1.0, 0.0).is_err());
        assert!(TradeoffCoefficients::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn penalty_only_for_reasoning_off_cloud() {
        assert_eq!(quality_penalty(TaskType::ReasoningB, false), 1.0);
        assert_eq!(quality_penalty(TaskType::ReasoningB, true), 0.0);
        assert_eq!(quality_penalty(TaskType::ReactiveA, false), 0.0);
    }
}
