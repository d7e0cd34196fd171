//! Configuration-driven entry point for the infobridge laboratory.
//!
//! Parse a JSON run specification, execute the requested study, and emit
//! reproducible JSON/CSV reports: identical `(config, seed)` pairs produce
//! byte-identical output files.

pub mod config;
pub mod run;

pub use config::{load_config, Command, ConfigError, Overrides, RunConfig};
pub use run::{run, RunError, RunReport, TOOL_VERSION};
