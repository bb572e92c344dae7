//! Configuration-driven batch runs: parse a run file, execute one mode, and
//! write the result tables plus a manifest describing what was computed.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting range checks

pub mod config;
pub mod run;

pub use config::{parse_config, Mode, RunConfig, Task};
pub use run::{run, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}
