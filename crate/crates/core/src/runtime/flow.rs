use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::gate::{safety_gate, CandidatePolicy, GateConfig, GateDecision, RejectCode};
use super::interface::{LayerInterface, Trigger};
use super::memory::{Feedback, MemoryState, Observation, DEFAULT_CAPACITY};
use super::queue::reflex_queue_process;
use crate::bus::{BusError, MessageId, MessageKind, Micros, SpiritBus, SpiritMessage};
use crate::config::ConfigError;
use crate::habit::{
    abstract_traces, compile_policy, detect_candidates, Action, ExecutionTrace, HabitPolicy, HabitWeights, ParamValue, PolicyRegistry, TraceEvent,
    DEFAULT_DRIFT_THRESHOLD, DEFAULT_WINDOW,
};
use crate::layer::Layer;
use crate::routing::{route_with_habit, Assignment, PolicyLookup, Thresholds};
use crate::sim::{sample_cost, CostModel, Path};
use crate::task::{NoiseTable, Task, TaskType};

/// What a layer produced for one task: the proposed actions and what the
/// work cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub actions: Vec<Action>,
    pub latency_ms: f64,
    pub energy_mj: f64,
    pub calls: u32,
    /// Self-reported confidence in the proposal, in [0, 1].
    pub confidence: f64,
    pub risk_features: BTreeMap<String, f64>,
}

/// Backend that does a layer's work. The simulated backend draws costs from
/// a [`CostModel`]; a real deployment would plug model inference in here.
pub trait LayerExecutor {
    fn execute(&mut self, layer: Layer, task: &Task, context: &[f64]) -> Result<Execution, RuntimeError>;
    /// Latency and energy of replaying a compiled habit policy for `task`.
    fn habit_cost(&mut self, task: &Task) -> Result<(f64, f64), RuntimeError>;
    /// Latency and energy of firing a registered trigger on the Reflex layer.
    fn trigger_cost(&mut self) -> (f64, f64);
}

/// The fixed action script a task kind produces. Repeated tasks read their
/// setpoint from the first context component, so compiled habits bind that
/// component to a slot.
pub fn scripted_actions(task: &Task, context: &[f64]) -> Vec<Action> {
    let num = ParamValue::Number;
    let text = |s: &str| ParamValue::Text(s.to_string());
    match task.kind {
        TaskType::ReactiveA => vec![
            Action::new("sense").with("sensor", text("proximity")),
            Action::new("actuate").with("command", text("brake")).with("level", num(1.0 - task.urgency)),
        ],
        TaskType::ReasoningB => vec![
            Action::new("plan").with("depth", num((task.complexity * 10.0).ceil())),
            Action::new("actuate").with("command", text("execute_plan")).with("level", num(task.complexity)),
            Action::new("report").with("channel", text("user")),
        ],
        TaskType::RepeatedC => vec![
            Action::new("read_sensor").with("sensor", text("thermostat")),
            Action::new("set_temperature").with("target", num(context.first().copied().unwrap_or(0.0))),
            Action::new("log").with("channel", text("routine")),
        ],
    }
}

/// Executor backed by the simulation cost model and a frozen noise table,
/// so the runtime's per-task costs match the simulator's for the same path.
#[derive(Debug, Clone)]
pub struct SimulatedExecutor {
    pub model: CostModel,
    pub noise: NoiseTable,
    /// Confidence attached to Agent proposals.
    pub agent_confidence: f64,
    /// Confidence attached to Super proposals.
    pub super_confidence: f64,
    /// Tasks whose complexity exceeds this are reported with the
    /// `complexity` risk feature set, for use by gate rule tables.
    pub risk_features: bool,
}

impl SimulatedExecutor {
    pub fn new(model: CostModel, noise: NoiseTable) -> Self {
        SimulatedExecutor { model, noise, agent_confidence: 0.9, super_confidence: 0.95, risk_features: true }
    }
}

impl LayerExecutor for SimulatedExecutor {
    fn execute(&mut self, layer: Layer, task: &Task, context: &[f64]) -> Result<Execution, RuntimeError> {
        let path = match layer {
            Layer::Reflex => Path::Reflex,
            Layer::Agent => Path::Agent,
            Layer::Super => Path::Super,
        };
        let cost = sample_cost(path, task.id, &self.noise, &self.model).map_err(|e| RuntimeError::Executor(e.to_string()))?;
        let confidence = match layer {
            Layer::Reflex => 1.0,
            Layer::Agent => self.agent_confidence,
            Layer::Super => self.super_confidence,
        };
        let mut risk_features = BTreeMap::new();
        if self.risk_features {
            risk_features.insert("urgency".to_string(), task.urgency);
            risk_features.insert("complexity".to_string(), task.complexity);
        }
        Ok(Execution {
            actions: scripted_actions(task, context),
            latency_ms: cost.latency_ms,
            energy_mj: cost.energy_mj,
            calls: cost.calls,
            confidence,
            risk_features,
        })
    }

    fn habit_cost(&mut self, task: &Task) -> Result<(f64, f64), RuntimeError> {
        let cost = sample_cost(Path::Habit, task.id, &self.noise, &self.model).map_err(|e| RuntimeError::Executor(e.to_string()))?;
        Ok((cost.latency_ms, cost.energy_mj))
    }

    fn trigger_cost(&mut self) -> (f64, f64) {
        (self.model.reflex.latency.mean, self.model.reflex.energy.mean)
    }
}

/// What happens to Super-routed work when the cloud is unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OfflineFallback {
    /// Report an offline failure.
    #[default]
    Fail,
    /// Run the task on the Agent layer instead.
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeConfig {
    pub thresholds: Thresholds,
    pub gate: GateConfig,
    pub habit: HabitWeights,
    pub memory_capacity: usize,
    pub super_reachable: bool,
    pub offline_fallback: OfflineFallback,
    /// Number of recent executions the habit detector looks at.
    pub window: usize,
    pub drift_threshold: f64,
    /// Commands the Reflex layer may emit; anything else fails verification.
    pub reflex_interface: LayerInterface,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            thresholds: Thresholds::default(),
            gate: GateConfig::default(),
            habit: HabitWeights::default(),
            memory_capacity: DEFAULT_CAPACITY,
            super_reachable: true,
            offline_fallback: OfflineFallback::Fail,
            window: DEFAULT_WINDOW,
            drift_threshold: DEFAULT_DRIFT_THRESHOLD,
            reflex_interface: LayerInterface::default(),
        }
    }
}

impl RuntimeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate()?;
        self.gate.validate()?;
        self.habit.validate()
    }
}

pub enum Request {
    Task { task: Task, context: Vec<f64> },
    Trigger(Trigger),
}

/// Gate verdict for a proposal from `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub origin: Layer,
    #[serde(flatten)]
    pub decision: GateDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OutcomeStatus {
    Completed,
    /// The task needed the cloud and the cloud was unreachable.
    OfflineFailure,
    /// A gate refused the proposal; nothing executed.
    Rejected {
        code: RejectCode,
    },
    /// Low-confidence proposal with no higher layer available to review it.
    Unreviewed,
}

/// One handled request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub request: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task_id: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
    /// The path whose cost was paid last; `None` when nothing ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Path>,
    #[serde(flatten)]
    pub status: OutcomeStatus,
    /// Actions executed on the Reflex layer, in execution order.
    pub actions: Vec<Action>,
    pub gates: Vec<GateRecord>,
    pub latency_ms: f64,
    pub energy_mj: f64,
    pub calls: u32,
}

impl OutcomeRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("outcomes are always representable as JSON")
    }

    /// True when every executed action came from a proposal whose last gate
    /// verdict was Pass.
    pub fn gate_sound(&self) -> bool {
        self.actions.is_empty() || matches!(self.gates.last(), Some(GateRecord { decision: GateDecision::Pass, .. }))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error("executor failed: {0}")]
    Executor(String),
}

/// Classes promoted and revoked by one maintenance pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaintenanceReport {
    pub promoted: Vec<String>,
    pub revoked: Vec<String>,
    /// Candidates that failed abstraction, compilation or gating, with why.
    pub skipped: Vec<(String, String)>,
}

const TASK_TTL: Micros = 10_000_000;

/// The three-layer runtime, driven synchronously: each request runs to
/// completion before the next, and inter-layer hand-offs go through the bus
/// on a logical clock advanced by simulated service time.
pub struct TriSpirit<E> {
    config: RuntimeConfig,
    executor: E,
    bus: SpiritBus,
    clock: Micros,
    next_id: u128,
    requests: u64,
    memory: MemoryState,
    registry: PolicyRegistry,
    window: VecDeque<(TraceEvent, ExecutionTrace)>,
    deploy_gates: BTreeMap<String, GateDecision>,
    recent: BTreeMap<String, VecDeque<Vec<f64>>>,
}

impl<E: LayerExecutor> TriSpirit<E> {
    pub fn new(config: RuntimeConfig, executor: E) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(TriSpirit {
            memory: MemoryState::new(config.memory_capacity),
            config,
            executor,
            bus: SpiritBus::new(),
            clock: 0,
            next_id: 0,
            requests: 0,
            registry: PolicyRegistry::new(),
            window: VecDeque::new(),
            deploy_gates: BTreeMap::new(),
            recent: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &RuntimeConfig {
        &self.config
    }

    pub fn set_super_reachable(&mut self, reachable: bool) {
        self.config.super_reachable = reachable;
    }

    pub fn executor(&self) -> &E {
        &self.executor
    }

    pub fn memory(&self) -> &MemoryState {
        &self.memory
    }

    pub fn registry(&self) -> &PolicyRegistry {
        &self.registry
    }

    pub fn bus(&self) -> &SpiritBus {
        &self.bus
    }

    /// Logical time in microseconds.
    pub fn now(&self) -> Micros {
        self.clock
    }

    /// Moves the logical clock forward, e.g. to model idle time between
    /// requests.
    pub fn advance(&mut self, micros: Micros) {
        self.clock += micros;
    }

    /// Sends `payload` from `src` to `dst` and receives it on the other side.
    fn hand_off(&mut self, src: Layer, dst: Layer, kind: MessageKind, payload: Vec<u8>) -> Result<Vec<u8>, RuntimeError> {
        self.next_id += 1;
        let priority = match dst {
            Layer::Reflex => 2,
            Layer::Agent => 1,
            Layer::Super => 0,
        };
        let msg = SpiritMessage { src, dst, kind, id: MessageId(self.next_id), payload, priority, ttl: self.clock + TASK_TTL };
        self.bus.publish(msg, self.clock)?;
        let delivery = self.bus.poll_next(dst, self.clock).expect("a just-published message is deliverable");
        Ok(delivery.message.payload)
    }

    fn charge(&mut self, out: &mut OutcomeRecord, path: Path, latency_ms: f64, energy_mj: f64, calls: u32) {
        out.path = Some(path);
        out.latency_ms += latency_ms;
        out.energy_mj += energy_mj;
        out.calls += calls;
        self.clock += (latency_ms * 1000.0).round() as Micros;
    }

    /// Runs gated actions on the Reflex layer in deadline order.
    fn run_on_reflex(&mut self, out: &mut OutcomeRecord, actions: Vec<Action>, src: Layer, deadline_ms: f64) -> Result<(), RuntimeError> {
        if src != Layer::Reflex {
            let payload = serde_json::to_vec(&actions).expect("actions serialise");
            self.hand_off(src, Layer::Reflex, MessageKind::Task, payload)?;
        }
        let pending = actions.into_iter().enumerate().map(|(i, a)| (a, deadline_ms + i as f64)).collect();
        out.actions.extend(reflex_queue_process(pending).into_iter().map(|(a, _)| a));
        out.status = OutcomeStatus::Completed;
        Ok(())
    }

    fn gate(&self, origin: Layer, exec: &Execution) -> Result<GateDecision, ConfigError> {
        let candidate =
            CandidatePolicy { body: exec.actions.clone(), confidence: exec.confidence, risk_features: exec.risk_features.clone(), origin };
        let decision = safety_gate(&candidate, &self.config.gate)?;
        let allowed = exec.actions.iter().all(|a| self.config.reflex_interface.allows_command(&a.name));
        Ok(match decision {
            GateDecision::Pass if !allowed => GateDecision::Reject { code: RejectCode::Verify },
            d => d,
        })
    }

    /// Executes `task` on a model-backed layer, gates the proposal and, on
    /// Pass, dispatches it to Reflex. Agent proposals that fail the
    /// confidence gate are escalated to Super when it is reachable.
    fn run_model_layer(&mut self, out: &mut OutcomeRecord, layer: Layer, task: &Task, context: &[f64]) -> Result<Option<Vec<Action>>, RuntimeError> {
        let payload = serde_json::to_vec(&(task.id, context)).expect("task serialises");
        self.hand_off(Layer::Agent, layer, MessageKind::Task, payload)?;
        let exec = self.executor.execute(layer, task, context)?;
        let path = if layer == Layer::Super { Path::Super } else { Path::Agent };
        self.charge(out, path, exec.latency_ms, exec.energy_mj, exec.calls);
        let decision = self.gate(layer, &exec)?;
        out.gates.push(GateRecord { origin: layer, decision });
        match decision {
            GateDecision::Pass => {
                let actions = exec.actions.clone();
                self.run_on_reflex(out, exec.actions, layer, self.clock as f64 / 1000.0)?;
                Ok(Some(actions))
            }
            GateDecision::Reject { code } => {
                out.status = OutcomeStatus::Rejected { code };
                Ok(None)
            }
            GateDecision::Escalate { .. } if layer == Layer::Agent && self.config.super_reachable => {
                self.run_model_layer(out, Layer::Super, task, context)
            }
            GateDecision::Escalate { .. } => {
                out.status = OutcomeStatus::Unreviewed;
                Ok(None)
            }
        }
    }

    /// Runs one request through classification, routing, execution, gating,
    /// memory update and habit logging.
    pub fn handle_request(&mut self, request: Request) -> Result<OutcomeRecord, RuntimeError> {
        self.requests += 1;
        let mut out = OutcomeRecord {
            request: self.requests,
            task_id: None,
            assignment: None,
            path: None,
            status: OutcomeStatus::Completed,
            actions: Vec::new(),
            gates: Vec::new(),
            latency_ms: 0.0,
            energy_mj: 0.0,
            calls: 0,
        };
        match request {
            Request::Trigger(trigger) => {
                let (latency, energy) = self.executor.trigger_cost();
                let exec = Execution {
                    actions: vec![trigger.to_action()],
                    latency_ms: latency,
                    energy_mj: energy,
                    calls: 0,
                    confidence: 1.0,
                    risk_features: BTreeMap::new(),
                };
                self.charge(&mut out, Path::Reflex, latency, energy, 0);
                let decision = self.gate(Layer::Reflex, &exec)?;
                out.gates.push(GateRecord { origin: Layer::Reflex, decision });
                match decision {
                    GateDecision::Pass => self.run_on_reflex(&mut out, exec.actions, Layer::Reflex, self.clock as f64 / 1000.0)?,
                    GateDecision::Reject { code } => out.status = OutcomeStatus::Rejected { code },
                    GateDecision::Escalate { .. } => out.status = OutcomeStatus::Unreviewed,
                }
            }
            Request::Task { task, context } => {
                out.task_id = Some(task.id);
                let class_key = task.kind.class_key();
                self.observe_context(class_key, &context);
                let assignment = route_with_habit(&task, class_key, &self.registry, &self.config.thresholds);
                out.assignment = Some(assignment);
                let executed = match assignment {
                    Assignment::Habit => self.run_habit(&mut out, &task, &context)?,
                    Assignment::Reflex => {
                        let exec = self.executor.execute(Layer::Reflex, &task, &context)?;
                        self.charge(&mut out, Path::Reflex, exec.latency_ms, exec.energy_mj, exec.calls);
                        let decision = self.gate(Layer::Reflex, &exec)?;
                        out.gates.push(GateRecord { origin: Layer::Reflex, decision });
                        match decision {
                            GateDecision::Pass => {
                                let actions = exec.actions.clone();
                                self.run_on_reflex(&mut out, exec.actions, Layer::Reflex, self.clock as f64 / 1000.0)?;
                                Some(actions)
                            }
                            GateDecision::Reject { code } => {
                                out.status = OutcomeStatus::Rejected { code };
                                None
                            }
                            GateDecision::Escalate { .. } => self.run_model_layer(&mut out, Layer::Agent, &task, &context)?,
                        }
                    }
                    Assignment::Agent => self.run_model_layer(&mut out, Layer::Agent, &task, &context)?,
                    Assignment::Super if self.config.super_reachable => self.run_model_layer(&mut out, Layer::Super, &task, &context)?,
                    Assignment::Super => match self.config.offline_fallback {
                        OfflineFallback::Agent => self.run_model_layer(&mut out, Layer::Agent, &task, &context)?,
                        OfflineFallback::Fail => {
                            out.status = OutcomeStatus::OfflineFailure;
                            None
                        }
                    },
                };
                if let Some(actions) = executed {
                    if assignment != Assignment::Habit {
                        self.log_execution(class_key, &context, actions);
                    }
                }
            }
        }
        let importance = f64::from(out.calls) + if matches!(out.status, OutcomeStatus::Completed) { 0.0 } else { 1.0 };
        let digest = format!("request {} {:?}", out.request, out.status);
        self.memory.update(Observation { digest, importance }, &Feedback::default());
        Ok(out)
    }

    /// Replays the deployed policy; falls back to threshold routing if the
    /// policy cannot serve this context.
    fn run_habit(&mut self, out: &mut OutcomeRecord, task: &Task, context: &[f64]) -> Result<Option<Vec<Action>>, RuntimeError> {
        let class_key = task.kind.class_key();
        match self.registry.with_policy(class_key, |p| p.replay(context)) {
            Some(Ok(actions)) => {
                let (latency, energy) = self.executor.habit_cost(task)?;
                self.charge(out, Path::Habit, latency, energy, 0);
                let decision = self.deploy_gates.get(class_key).copied().unwrap_or(GateDecision::Pass);
                out.gates.push(GateRecord { origin: Layer::Agent, decision });
                self.run_on_reflex(out, actions.clone(), Layer::Reflex, self.clock as f64 / 1000.0)?;
                Ok(Some(actions))
            }
            _ => {
                let assignment = crate::routing::route(task, &self.config.thresholds);
                out.assignment = Some(assignment);
                match assignment {
                    Assignment::Super if !self.config.super_reachable && self.config.offline_fallback == OfflineFallback::Fail => {
                        out.status = OutcomeStatus::OfflineFailure;
                        Ok(None)
                    }
                    Assignment::Super if self.config.super_reachable => self.run_model_layer(out, Layer::Super, task, context),
                    _ => self.run_model_layer(out, Layer::Agent, task, context),
                }
            }
        }
    }

    fn log_execution(&mut self, class_key: &str, context: &[f64], actions: Vec<Action>) {
        let timestamp = self.clock as f64 / 1e6;
        self.window.push_back((
            TraceEvent { class_key: class_key.to_string(), timestamp, context: context.to_vec() },
            ExecutionTrace { class_key: class_key.to_string(), actions, context: context.to_vec() },
        ));
        while self.window.len() > self.config.window {
            self.window.pop_front();
        }
    }

    /// Promotes habitual classes to compiled policies and revokes deployed
    /// policies whose recent contexts have drifted from their baseline.
    ///
    /// A promoted policy passes the safety gate, is serialised, shipped to
    /// the Reflex layer over the bus and deployed from the received text.
    pub fn habit_maintenance(&mut self) -> Result<MaintenanceReport, RuntimeError> {
        let mut report = MaintenanceReport::default();
        let events: Vec<TraceEvent> = self.window.iter().map(|(e, _)| e.clone()).collect();
        for candidate in detect_candidates(&events, &self.config.habit)? {
            let key = candidate.class_key;
            if self.registry.has_deployed(&key) {
                continue;
            }
            let traces: Vec<ExecutionTrace> = self.window.iter().filter(|(e, _)| e.class_key == key).map(|(_, t)| t.clone()).collect();
            let canonical = match abstract_traces(&traces) {
                Ok(c) => c,
                Err(e) => {
                    report.skipped.push((key, e.to_string()));
                    continue;
                }
            };
            let contexts: Vec<Vec<f64>> = traces.iter().map(|t| t.context.clone()).collect();
            let policy = match compile_policy(&canonical, &contexts) {
                Ok(p) => p,
                Err(e) => {
                    report.skipped.push((key, e.to_string()));
                    continue;
                }
            };
            let body = policy.replay(&contexts[0]).unwrap_or_default();
            let candidate_policy =
                CandidatePolicy { body, confidence: candidate.score.clamp(0.0, 1.0), risk_features: BTreeMap::new(), origin: Layer::Agent };
            let decision = safety_gate(&candidate_policy, &self.config.gate)?;
            if decision != GateDecision::Pass {
                report.skipped.push((key, format!("gate: {decision:?}")));
                continue;
            }
            let shipped = self.hand_off(Layer::Agent, Layer::Reflex, MessageKind::Habit, policy.to_text().into_bytes())?;
            let received = String::from_utf8(shipped).ok().and_then(|t| HabitPolicy::from_text(&t).ok());
            match received {
                Some(p) => {
                    self.registry.deploy(p);
                    self.recent.remove(&key);
                    self.deploy_gates.insert(key.clone(), decision);
                    report.promoted.push(key);
                }
                None => report.skipped.push((key, "policy text did not survive transport".into())),
            }
        }
        for key in self.registry.classes() {
            if !self.registry.has_deployed(&key) {
                continue;
            }
            let recent: Vec<Vec<f64>> = self.recent_contexts(&key);
            if let Some(Ok(verdict)) = self.registry.check_drift(&key, &recent, self.config.drift_threshold) {
                if verdict.is_drifted() {
                    // Re-promotion must rest on executions seen after the shift.
                    self.window.retain(|(e, _)| e.class_key != key);
                    self.recent.remove(&key);
                    report.revoked.push(key);
                }
            }
        }
        Ok(report)
    }

    /// Keeps the most recent contexts per class for drift monitoring.
    fn observe_context(&mut self, class_key: &str, context: &[f64]) {
        self.recent.entry(class_key.to_string()).or_default().push_back(context.to_vec());
        let cap = self.config.window;
        let q = self.recent.get_mut(class_key).unwrap();
        while q.len() > cap {
            q.pop_front();
        }
    }

    fn recent_contexts(&self, class_key: &str) -> Vec<Vec<f64>> {
        self.recent.get(class_key).map(|q| q.iter().cloned().collect()).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{Comparison, RiskRule, Trigger};
    use crate::task::{presample_noise, RngStreams, NOISE_DIMS};

    fn runtime(config: RuntimeConfig) -> TriSpirit<SimulatedExecutor> {
        let noise = presample_noise(5000, NOISE_DIMS, &RngStreams::default());
        TriSpirit::new(config, SimulatedExecutor::new(CostModel::default(), noise)).unwrap()
    }

    fn task(id: usize, kind: TaskType, urgency: f64, complexity: f64) -> Request {
        Request::Task { task: Task { id, kind, urgency, complexity }, context: vec![21.0, 1.0] }
    }

    #[test]
    fn urgent_simple_task_runs_on_reflex_without_model_calls() {
        let mut rt = runtime(RuntimeConfig::default());
        let o = rt.handle_request(task(0, TaskType::ReactiveA, 0.1, 0.1)).unwrap();
        assert_eq!(o.assignment, Some(Assignment::Reflex));
        assert_eq!(o.path, Some(Path::Reflex));
        assert_eq!(o.calls, 0);
        assert_eq!(o.status, OutcomeStatus::Completed);
        assert_eq!(o.actions.len(), 2);
        assert!(o.gate_sound());
    }

    #[test]
    fn super_task_offline_fails_or_falls_back() {
        let mut rt = runtime(RuntimeConfig { super_reachable: false, ..RuntimeConfig::default() });
        let o = rt.handle_request(task(1, TaskType::ReasoningB, 0.9, 0.9)).unwrap();
        assert_eq!(o.status, OutcomeStatus::OfflineFailure);
        assert!(o.actions.is_empty() && o.calls == 0);

        let mut rt = runtime(RuntimeConfig { super_reachable: false, offline_fallback: OfflineFallback::Agent, ..RuntimeConfig::default() });
        let o = rt.handle_request(task(1, TaskType::ReasoningB, 0.9, 0.9)).unwrap();
        assert_eq!(o.status, OutcomeStatus::Completed);
        assert_eq!((o.path, o.calls), (Some(Path::Agent), 1));
    }

    #[test]
    fn online_super_task_costs_two_calls() {
        let mut rt = runtime(RuntimeConfig::default());
        let o = rt.handle_request(task(2, TaskType::ReasoningB, 0.9, 0.9)).unwrap();
        assert_eq!((o.path, o.calls, o.status), (Some(Path::Super), 2, OutcomeStatus::Completed));
        assert_eq!(o.gates, vec![GateRecord { origin: Layer::Super, decision: GateDecision::Pass }]);
    }

    #[test]
    fn low_confidence_agent_proposal_escalates_to_super() {
        let noise = presample_noise(10, NOISE_DIMS, &RngStreams::default());
        let mut exec = SimulatedExecutor::new(CostModel::default(), noise);
        exec.agent_confidence = 0.4;
        let mut rt = TriSpirit::new(RuntimeConfig::default(), exec).unwrap();
        let o = rt.handle_request(task(3, TaskType::ReasoningB, 0.5, 0.6)).unwrap();
        assert_eq!(o.assignment, Some(Assignment::Agent));
        assert_eq!(o.calls, 3);
        assert_eq!(o.path, Some(Path::Super));
        assert!(matches!(o.gates[0].decision, GateDecision::Escalate { .. }));
        assert_eq!(o.gates[1].decision, GateDecision::Pass);
        assert!(o.gate_sound());

        rt.set_super_reachable(false);
        let o = rt.handle_request(task(4, TaskType::ReasoningB, 0.5, 0.6)).unwrap();
        assert_eq!(o.status, OutcomeStatus::Unreviewed);
        assert!(o.actions.is_empty());
    }

    #[test]
    fn risky_proposal_is_rejected_and_nothing_executes() {
        let gate = GateConfig { rules: vec![RiskRule::new("complexity", Comparison::Gt, 0.5, 0.6)], ..GateConfig::default() };
        let mut rt = runtime(RuntimeConfig { gate, ..RuntimeConfig::default() });
        let o = rt.handle_request(task(5, TaskType::ReasoningB, 0.5, 0.6)).unwrap();
        assert_eq!(o.status, OutcomeStatus::Rejected { code: RejectCode::Risk });
        assert!(o.actions.is_empty() && o.gate_sound());
    }

    #[test]
    fn commands_outside_the_reflex_interface_fail_verification() {
        let cfg = RuntimeConfig { reflex_interface: LayerInterface::with_commands(["sense"]), ..RuntimeConfig::default() };
        let mut rt = runtime(cfg);
        let o = rt.handle_request(task(6, TaskType::ReactiveA, 0.1, 0.1)).unwrap();
        assert_eq!(o.status, OutcomeStatus::Rejected { code: RejectCode::Verify });
    }

    #[test]
    fn triggers_fire_on_reflex() {
        let mut rt = runtime(RuntimeConfig::default());
        let t = Trigger::new("door_open", "turn_on_light", BTreeMap::new()).unwrap();
        let o = rt.handle_request(Request::Trigger(t)).unwrap();
        assert_eq!(o.actions, vec![Action::new("turn_on_light")]);
        assert_eq!((o.calls, o.path), (0, Some(Path::Reflex)));
    }

    fn routine(rt: &mut TriSpirit<SimulatedExecutor>, ids: std::ops::Range<usize>, target: impl Fn(usize) -> f64) -> Vec<OutcomeRecord> {
        ids.map(|id| {
            rt.advance(1_000_000);
            let urgency = 0.3 + 0.01 * (id % 5) as f64;
            let t = Task { id, kind: TaskType::RepeatedC, urgency, complexity: 0.2 };
            rt.handle_request(Request::Task { task: t, context: vec![target(id), 1.0] }).unwrap()
        })
        .collect()
    }

    #[test]
    fn habitual_class_is_compiled_served_and_revoked_on_drift() {
        let mut rt = runtime(RuntimeConfig::default());
        let warmup = routine(&mut rt, 0..40, |id| 21.0 + 0.1 * (id % 3) as f64);
        assert!(warmup.iter().all(|o| o.path == Some(Path::Agent)));
        let report = rt.habit_maintenance().unwrap();
        assert_eq!(report.promoted, vec!["C".to_string()]);
        let policy = rt.registry().get("C").unwrap();

        let served = routine(&mut rt, 40..60, |id| 21.0 + 0.1 * (id % 3) as f64);
        for o in &served {
            assert_eq!(o.assignment, Some(Assignment::Habit));
            assert_eq!(o.calls, 0);
            assert!(o.gate_sound());
        }
        let ctx = [21.0 + 0.1 * (45 % 3) as f64, 1.0];
        assert_eq!(served[5].actions, policy.replay(&ctx).unwrap());
        assert_eq!(served[5].actions, scripted_actions(&Task { id: 45, kind: TaskType::RepeatedC, urgency: 0.3, complexity: 0.2 }, &ctx));

        let shifted = routine(&mut rt, 60..90, |id| 30.0 + 0.1 * (id % 3) as f64);
        assert!(shifted.iter().all(|o| o.assignment == Some(Assignment::Habit)));
        let report = rt.habit_maintenance().unwrap();
        assert_eq!(report.revoked, vec!["C".to_string()]);
        let o = &routine(&mut rt, 90..91, |_| 30.0)[0];
        assert_eq!(o.assignment, Some(Assignment::Agent));
        assert_eq!(o.calls, 1);
    }

    #[test]
    fn mixed_workload_invariants() {
        let streams = RngStreams::default();
        let tasks = crate::task::sample_tasks(600, &crate::task::Mixture::default(), &streams).unwrap();
        let mut rt = runtime(RuntimeConfig { memory_capacity: 16, ..RuntimeConfig::default() });
        let mut by_path: BTreeMap<Path, Vec<f64>> = BTreeMap::new();
        for (i, t) in tasks.into_iter().enumerate() {
            if i == 300 {
                rt.set_super_reachable(false);
            }
            let o = rt.handle_request(Request::Task { task: t, context: vec![1.0] }).unwrap();
            assert!(rt.memory().working().len() <= 16);
            assert!(o.gate_sound());
            if i >= 300 && o.assignment != Some(Assignment::Super) {
                assert_eq!(o.status, OutcomeStatus::Completed, "degraded mode must serve local work");
            }
            if let Some(p) = o.path {
                by_path.entry(p).or_default().push(o.latency_ms);
            }
        }
        let mean = |p: Path| {
            let v = &by_path[&p];
            assert!(v.len() >= 30, "{p}: {} samples", v.len());
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(Path::Reflex) < mean(Path::Agent) && mean(Path::Agent) < mean(Path::Super));
        let stats = rt.bus().stats();
        assert_eq!(stats.published, stats.delivered + stats.expired + stats.pending);
        assert_eq!(stats.pending, 0);
    }

    #[test]
    fn outcome_json_lines_round_trip() {
        let mut rt = runtime(RuntimeConfig::default());
        let o = rt.handle_request(task(7, TaskType::ReasoningB, 0.5, 0.6)).unwrap();
        let line = o.to_json_line();
        assert!(!line.contains('\n'));
        let back: OutcomeRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, o);
    }
}
