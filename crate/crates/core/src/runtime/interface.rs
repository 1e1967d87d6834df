use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::habit::{Action, ParamValue};

/// The typed surface a layer exposes: accepted goal schemas, emitted command
/// kinds, monitoring probes and error codes. Schemas and probes are opaque
/// identifiers; only membership is checked.
///
/// An empty command set accepts any command.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerInterface {
    pub goals: BTreeSet<String>,
    pub commands: BTreeSet<String>,
    pub probes: BTreeSet<String>,
    pub exceptions: BTreeSet<String>,
}

impl LayerInterface {
    pub fn with_commands<I: IntoIterator<Item = S>, S: Into<String>>(commands: I) -> Self {
        LayerInterface { commands: commands.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn allows_command(&self, name: &str) -> bool {
        self.commands.is_empty() || self.commands.contains(name)
    }

    pub fn accepts_goal(&self, schema: &str) -> bool {
        self.goals.contains(schema)
    }

    pub fn has_probe(&self, probe: &str) -> bool {
        self.probes.contains(probe)
    }

    pub fn raises(&self, code: &str) -> bool {
        self.exceptions.contains(code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TriggerError {
    #[error("trigger action must not be empty")]
    EmptyAction,
}

/// Atomic unit of work: when `condition` holds, run `action` with
/// `parameters`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub condition: String,
    pub action: String,
    pub parameters: BTreeMap<String, ParamValue>,
}

impl Trigger {
    pub fn new(condition: impl Into<String>, action: impl Into<String>, parameters: BTreeMap<String, ParamValue>) -> Result<Self, TriggerError> {
        let action = action.into();
        if action.trim().is_empty() {
            return Err(TriggerError::EmptyAction);
        }
        Ok(Trigger { condition: condition.into(), action, parameters })
    }

    pub fn to_action(&self) -> Action {
        Action { name: self.action.clone(), params: self.parameters.clone() }
    }
}
