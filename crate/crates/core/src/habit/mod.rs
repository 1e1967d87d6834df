//! Habit compilation: promote a frequently repeated reasoning path into a
//! finite-state policy that runs without model inference.
//!
//! The pipeline has four stages:
//!
//! 1. [`detect_candidates`] scores each task class over a sliding trace log.
//! 2. [`abstract_traces`] aligns recent traces of a class with DTW and keeps
//!    the universally present actions as parameterised templates.
//! 3. [`compile_policy`] turns the canonical trace into a linear-chain FSM.
//! 4. [`drift_check`] compares live contexts against the compile-time
//!    baseline with a kernel MMD test and revokes the policy on drift.

mod align;
mod drift;
mod policy;
mod registry;
mod score;

pub use align::{abstract_traces, dtw, AbstractionError, ActionTemplate, CanonicalTrace, DtwAlignment, ExecutionTrace, TemplateParam};
pub use drift::{drift_check, median_bandwidth, mmd2_unbiased, DriftError, DriftVerdict, DEFAULT_DRIFT_THRESHOLD};
pub use policy::{compile_policy, Action, HabitPolicy, ParamValue, PolicyError, PolicyParseError, PolicyStatus, SlotBinding, Step, Transition};
pub use registry::PolicyRegistry;
pub use score::{class_stats, detect_candidates, habit_score, Candidate, HabitWeights, Squash, TaskClassStats, TraceEvent, DEFAULT_WINDOW};
