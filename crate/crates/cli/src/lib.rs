//! Config-driven runs of qsync scenarios: parse a TOML file, run exact or
//! sampled simulations over offsets and noise levels, write result tables.

pub mod config;
pub mod execute;
pub mod output;

pub use config::{parse_config, parse_config_with, ConfigError, ConfigErrors, Format, Overrides, ScenarioConfig};
pub use execute::{execute, Report, SummaryRow};
pub use output::{render, write_report};
