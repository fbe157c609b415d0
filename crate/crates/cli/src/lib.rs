//! Configuration-driven front end for tanfix experiments: runs the
//! averaged iteration, verifies space axioms and mapping constants, and
//! computes asymptotic centers of stored traces.

pub mod commands;
pub mod config;
pub mod error;
pub mod trace_csv;

pub use commands::{cmd_center, cmd_run, cmd_verify_mapping, cmd_verify_space};
pub use config::{Experiment, Overrides};
pub use error::{CliError, Result};
