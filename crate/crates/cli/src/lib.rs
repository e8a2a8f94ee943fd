//! Command-line orchestration of the exploration flow: characterize, train, explore,
//! evaluate and report, with a versioned TOML config and a checksummed run manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

pub use commands::{clipped_hypervolume, config_id, expected_kind, reference_point, run, Command};
pub use config::{Engine, Overrides, Profile, RunConfig, SearchMode};
pub use error::{CliError, CliResult};
pub use manifest::{Counters, RunManifest};
