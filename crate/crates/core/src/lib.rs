//! Simulation and verification of gracefully degrading gathering on dynamic
//! rings.
//!
//! The crate is layered bottom-up: [`ring`] models evolving rings and their
//! dynamics classes, [`protocol`] holds the rule-based robot algorithm,
//! [`sim`] runs it synchronously and emits a [`trace`], [`adversary`]
//! generates rings (including the adaptive always-connected adversary), and
//! [`checkers`] turns traces into verdicts.

pub mod adversary;
pub mod checkers;
pub mod protocol;
pub mod ring;
pub mod sim;
pub mod trace;

pub use adversary::{adaptive_ac_adversary, generate, AdversaryTargets, GeneratorSpec};
pub use checkers::{bound_for, check_safety, check_variant, default_horizon, evaluate, BoundParams, Variant, Verdict};
pub use protocol::{Algorithm, Gdg, RobotId, RobotState, RuleId};
pub use ring::{DynClass, EdgeId, EvolvingRing, NodeId, Snapshot};
pub use sim::{run, run_labeled, run_with, Configuration, Run, RunOutcome};
pub use trace::Trace;
