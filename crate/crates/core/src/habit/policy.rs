use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::align::{ActionTemplate, CanonicalTrace, TemplateParam};

/// A parameter value carried by an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x}"),
            ParamValue::Text(s) => write!(f, "{s:?}"),
        }
    }
}

/// A concrete action: a name and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl Action {
    pub fn new(name: impl Into<String>) -> Self {
        Action { name: name.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: ParamValue) -> Self {
        self.params.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyStatus {
    Deployed,
    Invalidated,
}

/// Edge of the FSM. Fires when the context has at least `min_context_dims`
/// components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub template: usize,
    pub min_context_dims: usize,
}

/// Records which template parameter a slot feeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotBinding {
    pub slot: usize,
    pub template: usize,
    pub key: String,
}

/// Compiled finite-state policy for one task class.
///
/// States are `0..state_count`; execution starts at `initial` and ends at
/// `terminal`. Each non-terminal state has exactly one outgoing transition,
/// indexed by its source state, so stepping is a single table lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct HabitPolicy {
    pub class_key: String,
    pub state_count: usize,
    pub initial: usize,
    pub terminal: usize,
    pub templates: Vec<ActionTemplate>,
    transitions: Vec<Transition>,
    pub slots: Vec<SlotBinding>,
    pub baseline_contexts: Vec<Vec<f64>>,
    pub status: PolicyStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub action: Action,
    pub next: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("policy for class `{0}` has been revoked")]
    Revoked(String),
    #[error("end of policy: state {0} is terminal")]
    EndOfPolicy(usize),
    #[error("state {0} does not exist")]
    UnknownState(usize),
    #[error("context has {got} components, transition needs {need}")]
    ContextTooShort { got: usize, need: usize },
    #[error("canonical trace has no templates")]
    EmptyCanonical,
    #[error("no baseline contexts supplied")]
    NoContexts,
    #[error("baseline contexts have inconsistent dimensions")]
    RaggedContexts,
    #[error("invalid policy structure: {0}")]
    Structure(String),
}

/// Builds the linear-chain FSM: state `i` emits template `i` and moves to
/// `i + 1`; the final state is terminal.
pub fn compile_policy(canonical: &CanonicalTrace, contexts: &[Vec<f64>]) -> Result<HabitPolicy, PolicyError> {
    if canonical.templates.is_empty() {
        return Err(PolicyError::EmptyCanonical);
    }
    if contexts.is_empty() {
        return Err(PolicyError::NoContexts);
    }
    let dims = contexts[0].len();
    if contexts.iter().any(|c| c.len() != dims) {
        return Err(PolicyError::RaggedContexts);
    }
    let mut slots = Vec::with_capacity(canonical.slot_count);
    let mut transitions = Vec::with_capacity(canonical.templates.len());
    for (i, template) in canonical.templates.iter().enumerate() {
        let mut need = 0;
        for (key, slot) in template.slots() {
            slots.push(SlotBinding { slot, template: i, key: key.to_string() });
            need = need.max(slot + 1);
        }
        transitions.push(Transition { from: i, to: i + 1, template: i, min_context_dims: need });
    }
    slots.sort_by_key(|s| s.slot);
    let n = canonical.templates.len();
    let policy = HabitPolicy {
        class_key: canonical.class_key.clone(),
        state_count: n + 1,
        initial: 0,
        terminal: n,
        templates: canonical.templates.clone(),
        transitions,
        slots,
        baseline_contexts: contexts.to_vec(),
        status: PolicyStatus::Deployed,
    };
    policy.check_structure()?;
    Ok(policy)
}

impl HabitPolicy {
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn is_deployed(&self) -> bool {
        self.status == PolicyStatus::Deployed
    }

    pub fn invalidate(&mut self) {
        self.status = PolicyStatus::Invalidated;
    }

    /// Number of context components a full replay reads.
    pub fn context_dims_required(&self) -> usize {
        self.transitions.iter().map(|t| t.min_context_dims).max().unwrap_or(0)
    }

    /// Emits the action for `state` and the successor state.
    pub fn step(&self, state: usize, context: &[f64]) -> Result<Step, PolicyError> {
        if !self.is_deployed() {
            return Err(PolicyError::Revoked(self.class_key.clone()));
        }
        if state == self.terminal {
            return Err(PolicyError::EndOfPolicy(state));
        }
        let tr = self.transitions.get(state).ok_or(PolicyError::UnknownState(state))?;
        if context.len() < tr.min_context_dims {
            return Err(PolicyError::ContextTooShort { got: context.len(), need: tr.min_context_dims });
        }
        let template = &self.templates[tr.template];
        let params = template
            .params
            .iter()
            .map(|(k, p)| {
                let v = match p {
                    TemplateParam::Literal(v) => v.clone(),
                    TemplateParam::Slot(i) => ParamValue::Number(context[*i]),
                };
                (k.clone(), v)
            })
            .collect();
        Ok(Step { action: Action { name: template.name.clone(), params }, next: tr.to })
    }

    /// Runs the policy from the initial state to the terminal state.
    pub fn replay(&self, context: &[f64]) -> Result<Vec<Action>, PolicyError> {
        let mut state = self.initial;
        let mut out = Vec::with_capacity(self.templates.len());
        while state != self.terminal {
            let step = self.step(state, context)?;
            out.push(step.action);
            state = step.next;
        }
        Ok(out)
    }

    /// Checks determinism (one transition per non-terminal state) and that
    /// every state reaches the terminal state.
    fn check_structure(&self) -> Result<(), PolicyError> {
        let bad = |m: String| Err(PolicyError::Structure(m));
        if self.initial >= self.state_count || self.terminal >= self.state_count {
            return bad("initial or terminal state out of range".into());
        }
        if self.transitions.len() + 1 != self.state_count {
            return bad(format!("{} transitions for {} states", self.transitions.len(), self.state_count));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from != i {
                return bad(format!("transition {i} leaves state {}", t.from));
            }
            if t.from == self.terminal {
                return bad("terminal state has an outgoing transition".into());
            }
            if t.to >= self.state_count || t.template >= self.templates.len() {
                return bad(format!("transition {i} references a missing state or template"));
            }
        }
        for start in 0..self.state_count {
            let mut s = start;
            let mut hops = 0;
            while s != self.terminal {
                s = self.transitions[s].to;
                hops += 1;
                if hops > self.state_count {
                    return bad(format!("state {start} never reaches the terminal state"));
                }
            }
        }
        for b in &self.slots {
            match self.templates.get(b.template).and_then(|t| t.params.get(&b.key)) {
                Some(TemplateParam::Slot(i)) if *i == b.slot => {}
                _ => return bad(format!("slot {} does not match its template parameter", b.slot)),
            }
        }
        Ok(())
    }
}

const POLICY_MAGIC: &str = "trispirit-policy v1";

#[derive(Serialize, Deserialize)]
struct StatesLine {
    count: usize,
    initial: usize,
    terminal: usize,
}

#[derive(Serialize, Deserialize)]
struct BaselineLine {
    rows: usize,
    dims: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("policy text line {line}: {reason}")]
pub struct PolicyParseError {
    pub line: usize,
    pub reason: String,
}

impl HabitPolicy {
    /// Serialises to the line-oriented `trispirit-policy v1` format. Each line
    /// is a keyword followed by a JSON value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(POLICY_MAGIC);
        out.push('\n');
        out.push_str(&format!("class {}\n", j(&self.class_key)));
        out.push_str(&format!("status {}\n", j(&self.status)));
        let states = StatesLine { count: self.state_count, initial: self.initial, terminal: self.terminal };
        out.push_str(&format!("states {}\n", j(&states)));
        for t in &self.templates {
            out.push_str(&format!("template {}\n", j(t)));
        }
        for t in &self.transitions {
            out.push_str(&format!("transition {}\n", j(t)));
        }
        for s in &self.slots {
            out.push_str(&format!("slot {}\n", j(s)));
        }
        let dims = self.baseline_contexts.first().map_or(0, Vec::len);
        out.push_str(&format!("baseline {}\n", j(&BaselineLine { rows: self.baseline_contexts.len(), dims })));
        for c in &self.baseline_contexts {
            out.push_str(&format!("context {}\n", j(c)));
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<HabitPolicy, PolicyParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let err = |line: usize, reason: String| PolicyParseError { line, reason };
        match lines.next() {
            Some((_, POLICY_MAGIC)) => {}
            Some((n, other)) => return Err(err(n, format!("expected `{POLICY_MAGIC}`, found `{other}`"))),
            None => return Err(err(1, "empty input".into())),
        }
        let mut class_key = None;
        let mut status = None;
        let mut states: Option<StatesLine> = None;
        let mut templates = Vec::new();
        let mut transitions = Vec::new();
        let mut slots = Vec::new();
        let mut baseline: Option<BaselineLine> = None;
        let mut contexts: Vec<Vec<f64>> = Vec::new();
        let mut ended = false;
        let mut last = 1;
        for (n, line) in lines {
            last = n;
            if line.is_empty() {
                continue;
            }
            if line == "end" {
                ended = true;
                break;
            }
            let (kw, body) = line.split_once(' ').ok_or_else(|| err(n, format!("malformed line `{line}`")))?;
            let parse_err = |e: serde_json::Error| err(n, format!("{kw}: {e}"));
            match kw {
                "class" => class_key = Some(serde_json::from_str::<String>(body).map_err(parse_err)?),
                "status" => status = Some(serde_json::from_str::<PolicyStatus>(body).map_err(parse_err)?),
                "states" => states = Some(serde_json::from_str(body).map_err(parse_err)?),
                "template" => templates.push(serde_json::from_str(body).map_err(parse_err)?),
                "transition" => transitions.push(serde_json::from_str(body).map_err(parse_err)?),
                "slot" => slots.push(serde_json::from_str(body).map_err(parse_err)?),
                "baseline" => baseline = Some(serde_json::from_str(body).map_err(parse_err)?),
                "context" => contexts.push(serde_json::from_str(body).map_err(parse_err)?),
                other => return Err(err(n, format!("unknown keyword `{other}`"))),
            }
        }
        if !ended {
            return Err(err(last, "missing `end`".into()));
        }
        let missing = |what: &str| err(last, format!("missing `{what}` line"));
        let states = states.ok_or_else(|| missing("states"))?;
        let baseline = baseline.ok_or_else(|| missing("baseline"))?;
        if contexts.len() != baseline.rows || contexts.iter().any(|c| c.len() != baseline.dims) {
            return Err(err(last, "baseline matrix does not match its declared shape".into()));
        }
        let policy = HabitPolicy {
            class_key: class_key.ok_or_else(|| missing("class"))?,
            state_count: states.count,
            initial: states.initial,
            terminal: states.terminal,
            templates,
            transitions,
            slots,
            baseline_contexts: contexts,
            status: status.ok_or_else(|| missing("status"))?,
        };
        policy.check_structure().map_err(|e| err(last, e.to_string()))?;
        Ok(policy)
    }
}

fn j<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("policy fields serialise")
}
