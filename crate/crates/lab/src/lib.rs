//! Scenario runner for spectral multiplier experiments.
//!
//! A scenario is a TOML file naming a model, an operation and its parameter
//! grids. [`run::run_scenario`] executes it and writes CSV, JSON, plot data and
//! a manifest; [`verify`] holds the built-in self-check suites.

pub mod cache;
pub mod config;
pub mod error;
pub mod manifest;
pub mod ops;
pub mod report;
pub mod run;
pub mod verify;

pub use error::LabError;
