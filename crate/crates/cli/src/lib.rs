//! Command-line front end: configuration, figure presets and deterministic output.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

pub use config::ScenarioConfig;
pub use error::{CliError, Result};
