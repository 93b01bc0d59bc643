//! Command-line front end: `run`, `verify` and `list`.

pub mod commands;
pub mod config;
pub mod trace;

pub use commands::{audit, cmd_list, cmd_run, cmd_verify, Audit, RunOptions};
pub use config::RunConfig;
