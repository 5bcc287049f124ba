//! Simulation and planning toolkit for proof-of-work networks whose nodes are
//! separated by light-minutes or more.
//!
//! - [`relkin`]: Lorentz boosts, dilation and causal classification.
//! - [`pow`]: compact difficulty bits, SHA-256 proof-of-work, subsidy schedule.
//! - [`topo`]: node motion, light-delay graphs and graph metrics.
//! - [`simcore`]: the discrete-event network simulator.
//! - [`planner`]: blocktime lower bounds and the feasibility verdict.

pub mod planner;
pub mod pow;
pub mod relkin;
pub mod simcore;
pub mod topo;

/// Durations and light-travel times, in seconds.
pub type Seconds = f64;

pub use planner::{BlocktimeBound, BoundRule, FeasibilityVerdict, Sampling, Verdict};
pub use pow::{CompactBits, SubsidySchedule, Target};
pub use relkin::{CausalClass, Causality, SpacetimeEvent, Velocity, SPEED_OF_LIGHT};
pub use simcore::{MiningModel, Scenario, SimError, SimReport, TxSpec};
pub use topo::{LatencyGraph, MotionSpec, NodeSpec, TopoError};
