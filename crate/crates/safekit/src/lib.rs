//! Verification and runtime-monitoring toolkit for a discrete-time robot
//! safety controller.
//!
//! The toolkit covers four concerns around one controller model:
//!
//! - **Controller execution** ([`controller`]): a pure step semantics for the
//!   hazard-mitigation state machines and explicit-state graph generation
//!   under a constrained input environment.
//! - **Specification** ([`spec_lang`]): a small requirement language compiled
//!   into deterministic timed safety automata with bounded-response
//!   obligations.
//! - **Verification** ([`refinement`]): timed traces refinement, deadlock and
//!   determinism checks with counterexample extraction, cross-checked by a
//!   brute-force trace enumeration oracle.
//! - **Quantitative analysis** ([`stochastic`]): a synchronized stochastic
//!   model of robot, detection system and human presence, exact reachability
//!   probabilities, Monte Carlo cross-validation, and mapping of failure
//!   probabilities to safety integrity levels.
//! - **Runtime verification** ([`rv`]): monitors synthesized from the same
//!   requirements, evaluating recorded or live event streams with latching
//!   verdicts, mitigation triggers and near-miss accounting.
//!
//! The `examples/` directory shows one runnable walkthrough per capability;
//! the `safekit` binary exposes the same functionality as `verify`,
//! `analyze`, `simulate` and `monitor` subcommands (see [`cli`]).

pub mod cli;
pub mod controller;
pub mod domain;
pub mod refinement;
pub mod rv;
pub mod spec_lang;
pub mod stochastic;

pub use domain::{
    default_requirements, required_actions, severity_rank, Action, Classification, Detection,
    Event, Requirement, TimedTrace, Zone,
};
