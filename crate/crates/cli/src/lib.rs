//! Command implementations behind the `lutnas` binary. Each command returns
//! its printable output so it can be driven from tests as well as `main`.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{
    export_arch, pareto_report, predict, search, stats, validate_lut, RunReport, TableFormat,
};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
