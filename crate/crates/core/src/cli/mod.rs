//! Configuration and evaluation behind the `sinr-outage` binary.

pub mod config;
pub mod runner;

pub use config::{parse_config, ConfigError, RunConfig};
pub use runner::{cumulant_table, run, write_cumulant_csv, write_outage_csv};
