//! Layer runtime: memory model, safety gates, interface contracts and the
//! request execution flow.

mod flow;
mod gate;
mod interface;
mod memory;
mod queue;

pub use flow::{
    scripted_actions, Execution, GateRecord, LayerExecutor, MaintenanceReport, OfflineFallback, OutcomeRecord, OutcomeStatus, Request, RuntimeConfig,
    RuntimeError, SimulatedExecutor, TriSpirit,
};
pub use gate::{safety_gate, verify, CandidatePolicy, Comparison, GateConfig, GateDecision, RejectCode, RiskRule, VerifyRule};
pub use interface::{LayerInterface, Trigger, TriggerError};
pub use memory::{EpisodicEntry, Feedback, Goal, MemoryState, Observation};
pub use queue::reflex_queue_process;
