//! Experiment driver for `bridgelab-core`: flat key-value configuration,
//! a density catalog, CSV output and the batch commands behind the
//! `bridgelab` binary.

pub mod catalog;
pub mod commands;
pub mod config;
pub mod csv;

pub use commands::{CmdError, Command, Outcome};
pub use config::{Config, RawConfig};
