//! The three gates a proposed policy must clear before Reflex executes it:
//! confidence strictly above a floor, rule-table risk strictly below a
//! ceiling, and a deterministic structural check.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::habit::{Action, ParamValue};
use crate::layer::Layer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePolicy {
    pub body: Vec<Action>,
    pub confidence: f64,
    pub risk_features: BTreeMap<String, f64>,
    pub origin: Layer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
}

impl Comparison {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Eq => lhs == rhs,
        }
    }
}

/// Adds `contribution` to the risk score when `feature <cmp> value` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRule {
    pub feature: String,
    pub cmp: Comparison,
    pub value: f64,
    pub contribution: f64,
}

impl RiskRule {
    pub fn new(feature: impl Into<String>, cmp: Comparison, value: f64, contribution: f64) -> Self {
        RiskRule { feature: feature.into(), cmp, value, contribution }
    }

    fn matches(&self, features: &BTreeMap<String, f64>) -> bool {
        features.get(&self.feature).is_some_and(|&v| self.cmp.holds(v, self.value))
    }
}

/// Deterministic predicates over the policy body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum VerifyRule {
    ForbidAction { name: String },
    MaxActions { limit: usize },
    RequireParam { action: String, key: String },
    NumericRange { key: String, min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub confidence_floor: f64,
    pub risk_ceiling: f64,
    #[serde(default)]
    pub rules: Vec<RiskRule>,
    #[serde(default)]
    pub verify: Vec<VerifyRule>,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig { confidence_floor: 0.5, risk_ceiling: 0.5, rules: Vec::new(), verify: Vec::new() }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("theta_c", self.confidence_floor), ("theta_r", self.risk_ceiling)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Gate(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        for (i, r) in self.rules.iter().enumerate() {
            if r.feature.is_empty() {
                return Err(ConfigError::Gate(format!("risk rule {i} has an empty feature name")));
            }
            if !r.value.is_finite() || !r.contribution.is_finite() || r.contribution < 0.0 {
                return Err(ConfigError::Gate(format!("risk rule {i} needs a finite value and a non-negative contribution")));
            }
        }
        for (i, r) in self.verify.iter().enumerate() {
            if let VerifyRule::NumericRange { min, max, .. } = r {
                if min.partial_cmp(max).is_none_or(|o| o.is_gt()) {
                    return Err(ConfigError::Gate(format!("verify rule {i} has an empty range")));
                }
            }
        }
        Ok(())
    }

    /// Sum of matching rule contributions, clamped to `[0, 1]`.
    pub fn risk(&self, features: &BTreeMap<String, f64>) -> f64 {
        self.rules.iter().filter(|r| r.matches(features)).map(|r| r.contribution).sum::<f64>().clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectCode {
    Risk,
    Verify,
}

impl fmt::Display for RejectCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectCode::Risk => "risk",
            RejectCode::Verify => "verify",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum GateDecision {
    Pass,
    /// Confidence did not clear the floor; send to Super for review.
    Escalate {
        confidence: f64,
    },
    Reject {
        code: RejectCode,
    },
}

/// Evaluates every verify rule in a single pass over `body`, stopping at the
/// first violation. Returns the verdict and the number of body elements
/// visited.
pub fn verify(body: &[Action], rules: &[VerifyRule]) -> (bool, usize) {
    let mut visited = 0;
    for action in body {
        visited += 1;
        let ok = rules.iter().all(|rule| match rule {
            VerifyRule::ForbidAction { name } => &action.name != name,
            VerifyRule::MaxActions { limit } => visited <= *limit,
            VerifyRule::RequireParam { action: a, key } => &action.name != a || action.params.contains_key(key),
            VerifyRule::NumericRange { key, min, max } => match action.params.get(key) {
                Some(ParamValue::Number(x)) => *x >= *min && *x <= *max,
                _ => true,
            },
        });
        if !ok {
            return (false, visited);
        }
    }
    (true, visited)
}

pub fn safety_gate(candidate: &CandidatePolicy, cfg: &GateConfig) -> Result<GateDecision, ConfigError> {
    cfg.validate()?;
    // NaN risk compares as not below the ceiling and is rejected.
    if cfg.risk(&candidate.risk_features).partial_cmp(&cfg.risk_ceiling) != Some(std::cmp::Ordering::Less) {
        return Ok(GateDecision::Reject { code: RejectCode::Risk });
    }
    if !verify(&candidate.body, &cfg.verify).0 {
        return Ok(GateDecision::Reject { code: RejectCode::Verify });
    }
    if candidate.confidence > cfg.confidence_floor {
        Ok(GateDecision::Pass)
    } else {
        Ok(GateDecision::Escalate { confidence: candidate.confidence })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn candidate(confidence: f64, features: &[(&str, f64)]) -> CandidatePolicy {
        CandidatePolicy {
            body: vec![Action::new("move").with("speed", ParamValue::Number(1.0)), Action::new("stop")],
            confidence,
            risk_features: features.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            origin: Layer::Agent,
        }
    }

    fn cfg() -> GateConfig {
        GateConfig {
            confidence_floor: 0.5,
            risk_ceiling: 0.5,
            rules: vec![
                RiskRule::new("speed", Comparison::Gt, 2.0, 0.3),
                RiskRule::new("near_human", Comparison::Eq, 1.0, 0.3),
                RiskRule::new("base", Comparison::Ge, 0.0, 0.1),
            ],
            verify: vec![VerifyRule::ForbidAction { name: "self_destruct".into() }],
        }
    }

    #[test]
    fn all_gates_clear() {
        assert_eq!(safety_gate(&candidate(0.9, &[("base", 1.0)]), &cfg()).unwrap(), GateDecision::Pass);
    }

    #[test]
    fn confidence_on_the_floor_escalates() {
        assert_eq!(safety_gate(&candidate(0.5, &[]), &cfg()).unwrap(), GateDecision::Escalate { confidence: 0.5 });
    }

    #[test]
    fn summed_risk_on_or_above_ceiling_rejects() {
        let c = candidate(0.9, &[("speed", 3.0), ("near_human", 1.0)]);
        assert!((cfg().risk(&c.risk_features) - 0.6).abs() < 1e-12);
        assert_eq!(safety_gate(&c, &cfg()).unwrap(), GateDecision::Reject { code: RejectCode::Risk });
        let mut exact = cfg();
        exact.rules = vec![RiskRule::new("r", Comparison::Ge, 0.0, 0.5)];
        assert_eq!(safety_gate(&candidate(0.9, &[("r", 0.0)]), &exact).unwrap(), GateDecision::Reject { code: RejectCode::Risk });
    }

    #[test]
    fn risk_is_clamped() {
        let mut c = cfg();
        c.rules = vec![RiskRule::new("x", Comparison::Ge, 0.0, 0.8); 3];
        assert_eq!(c.risk(&BTreeMap::from([("x".into(), 1.0)])), 1.0);
    }

    #[test]
    fn verify_failure_rejects() {
        let mut c = candidate(0.9, &[]);
        c.body.push(Action::new("self_destruct"));
        assert_eq!(safety_gate(&c, &cfg()).unwrap(), GateDecision::Reject { code: RejectCode::Verify });
    }

    #[test]
    fn verify_rules() {
        let body = vec![
            Action::new("move").with("speed", ParamValue::Number(1.5)),
            Action::new("grip").with("force", ParamValue::Number(9.0)),
            Action::new("move").with("speed", ParamValue::Number(0.5)),
        ];
        assert_eq!(verify(&body, &[]), (true, 3));
        assert!(!verify(&body, &[VerifyRule::MaxActions { limit: 2 }]).0);
        assert!(verify(&body, &[VerifyRule::RequireParam { action: "move".into(), key: "speed".into() }]).0);
        assert!(!verify(&body, &[VerifyRule::RequireParam { action: "grip".into(), key: "width".into() }]).0);
        assert!(verify(&body, &[VerifyRule::RequireParam { action: "absent".into(), key: "k".into() }]).0);
        assert!(!verify(&body, &[VerifyRule::NumericRange { key: "force".into(), min: 0.0, max: 5.0 }]).0);
    }

    #[test]
    fn malformed_tables_are_config_errors() {
        let mut c = cfg();
        c.rules.push(RiskRule::new("", Comparison::Gt, 0.0, 0.1));
        assert!(matches!(safety_gate(&candidate(0.9, &[]), &c), Err(ConfigError::Gate(_))));
        let mut c = cfg();
        c.rules.push(RiskRule::new("x", Comparison::Gt, 0.0, -0.1));
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.confidence_floor = 1.5;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.verify.push(VerifyRule::NumericRange { key: "k".into(), min: 2.0, max: 1.0 });
        assert!(c.validate().is_err());
    }
}
