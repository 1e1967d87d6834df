use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the three cognitive tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    /// Cloud-scale planning; seconds to minutes.
    Super,
    /// On-device reasoning; milliseconds to seconds.
    Agent,
    /// FSM and rule-table execution; never runs model inference.
    Reflex,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Super, Layer::Agent, Layer::Reflex];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Super => "super",
            Layer::Agent => "agent",
            Layer::Reflex => "reflex",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "super" => Ok(Layer::Super),
            "agent" => Ok(Layer::Agent),
            "reflex" => Ok(Layer::Reflex),
            other => Err(format!("unknown layer `{other}`")),
        }
    }
}
