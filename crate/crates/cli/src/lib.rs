//! Scenario orchestration and result emission for the pair-source toolkit.
//!
//! Each scenario reproduces one characterization of the dual-pump source
//! (phase-matching spectrum, Raman power scaling, rate and CAR sweeps,
//! single-pump suppression, pump placement) and emits plot-ready CSV/JSON
//! plus a manifest recording the config hash and toolkit version.

pub mod output;
pub mod scenarios;

pub use scenarios::{run_scenario, RunContext, Scenario, ScenarioError};
