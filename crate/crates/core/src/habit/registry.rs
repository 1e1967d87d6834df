use std::collections::BTreeMap;
use std::sync::RwLock;

use super::drift::{drift_check, DriftError, DriftVerdict};
use super::policy::HabitPolicy;
use crate::routing::PolicyLookup;

/// Deployed habit policies keyed by class. One writer (the compiler or the
/// drift monitor) and any number of readers; every status change happens
/// under the write lock.
#[derive(Debug, Default)]
pub struct PolicyRegistry {
    policies: RwLock<BTreeMap<String, HabitPolicy>>,
}

impl PolicyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Installs `policy`, replacing any previous policy for its class.
    pub fn deploy(&self, policy: HabitPolicy) {
        self.policies.write().unwrap().insert(policy.class_key.clone(), policy);
    }

    pub fn get(&self, class_key: &str) -> Option<HabitPolicy> {
        self.policies.read().unwrap().get(class_key).cloned()
    }

    pub fn with_policy<T>(&self, class_key: &str, f: impl FnOnce(&HabitPolicy) -> T) -> Option<T> {
        self.policies.read().unwrap().get(class_key).map(f)
    }

    /// Returns true when a policy existed and was revoked by this call.
    pub fn invalidate(&self, class_key: &str) -> bool {
        let mut guard = self.policies.write().unwrap();
        match guard.get_mut(class_key) {
            Some(p) if p.is_deployed() => {
                p.invalidate();
                true
            }
            _ => false,
        }
    }

    /// Runs the drift test for one class; a drifted policy is revoked in place.
    pub fn check_drift(&self, class_key: &str, recent: &[Vec<f64>], threshold: f64) -> Option<Result<DriftVerdict, DriftError>> {
        let mut guard = self.policies.write().unwrap();
        guard.get_mut(class_key).map(|p| drift_check(p, recent, threshold))
    }

    pub fn classes(&self) -> Vec<String> {
        self.policies.read().unwrap().keys().cloned().collect()
    }
}

impl PolicyLookup for PolicyRegistry {
    fn has_deployed(&self, class_key: &str) -> bool {
        self.policies.read().unwrap().get(class_key).is_some_and(HabitPolicy::is_deployed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::habit::{compile_policy, ActionTemplate, CanonicalTrace};
    use crate::routing::{route, route_with_habit, Assignment, Thresholds};
    use crate::task::{Task, TaskType};

    #[test]
    fn invalidation_reverts_routing() {
        let canon = CanonicalTrace {
            class_key: "C".into(),
            templates: vec![ActionTemplate { name: "go".into(), params: Default::default() }],
            slot_count: 0,
        };
        let reg = PolicyRegistry::new();
        reg.deploy(compile_policy(&canon, &[vec![0.0]]).unwrap());
        let th = Thresholds::default();
        let t = Task::new(0, TaskType::RepeatedC, 0.1, 0.1);
        assert_eq!(route_with_habit(&t, "C", &reg, &th), Assignment::Habit);
        assert!(reg.invalidate("C"));
        assert!(!reg.invalidate("C"));
        assert_eq!(route_with_habit(&t, "C", &reg, &th), route(&t, &th));
        assert_eq!(reg.classes(), vec!["C".to_string()]);
    }
}
