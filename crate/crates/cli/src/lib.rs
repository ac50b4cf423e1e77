//! Command-line front end for the disk-mapping pipeline: configuration,
//! subcommands and the exit-status contract.

pub mod commands;
pub mod config;
pub mod failure;

pub use config::{Overrides, RunConfig};
pub use failure::{Exit, Failure};
