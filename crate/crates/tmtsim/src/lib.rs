//! Discrete-time simulator for matching-based self-adjusting ToR-to-ToR
//! networks.
//!
//! `n` top-of-rack nodes are interconnected by `k` spine switches, each
//! realizing one directed matching at a time; the network at any slot is the
//! union of the switches' active matchings. An online request sequence is
//! served at shortest-path cost while static, rotor, and demand-aware
//! controllers evolve the matchings, and every change is priced under a
//! configurable adjustment-cost regime.
//!
//! Start with [`engine::run`], or see the guide in `book/` for a walkthrough.

pub mod cost;
pub mod engine;
pub mod model;
pub mod policy;
pub mod rational;
pub mod switch;
pub mod traffic;

pub mod config;
pub mod report;

pub use cost::{CostLedger, StepCost};
pub use engine::{replay_verify, run, SimConfig, SimResult};
pub use model::{
    AdjustmentMode, CostParams, DirectedEdge, InactivityScope, Matching, NetworkSnapshot, NodeId,
    Request, SwitchConfig, SwitchKind, Trace,
};
pub use rational::Rational;

#[cfg(doctest)]
mod booktest;
