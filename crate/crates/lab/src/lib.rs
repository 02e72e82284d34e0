//! Scenario runner for `elastic-phaseless`.
//!
//! Scenarios are TOML files (see [`config`]); a set of them ships embedded
//! as [`presets`]. [`runner::run_scenario`] turns a scenario into a
//! directory of CSV, PGM and sidecar files described by a `manifest.toml`.
//! The `eplab` binary wraps all of this behind a small command line.

pub mod config;
pub mod formats;
pub mod presets;
pub mod runner;

pub use config::{ConfigError, Scenario, Tier};
pub use runner::{run_scenario, RunError, RunOptions, RunReport};
