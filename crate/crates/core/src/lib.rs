//! Three-layer cognitive runtime with a seeded evaluation harness.
//!
//! Work is split across a cloud planning tier ([`Layer::Super`]), an
//! on-device reasoning tier ([`Layer::Agent`]) and an inference-free
//! execution tier ([`Layer::Reflex`]). The crate provides
//!
//! * [`task`]: synthetic workload generation with fixed-seed RNG streams,
//! * [`routing`]: threshold-based layer selection and the cost objective,
//! * [`habit`]: habit scoring, trace alignment, FSM compilation and drift
//!   monitoring,
//! * [`bus`]: the priority/TTL message bus between layers,
//! * [`runtime`]: memory, safety gates and the request execution flow,
//! * [`sim`]: cost models, system variants, bootstrap statistics, threshold
//!   sweeps and the ablation suite,
//! * [`cli`]: the `trispirit` command-line driver.

pub mod bus;
pub mod cli;
pub mod config;
pub mod habit;
pub mod layer;
pub mod routing;
pub mod runtime;
pub mod sim;
pub mod task;

pub use layer::Layer;
pub use routing::{route, route_with_habit, Assignment, Thresholds};
pub use task::{sample_tasks, Mixture, RngStreams, Task, TaskType};
