//! File formats, run manifests, batch verification and the command
//! implementations behind the `qw1` binary.

pub mod commands;
pub mod error;
pub mod format;
pub mod manifest;
pub mod suite;

pub use error::{CliError, EXIT_INPUT, EXIT_NONCONVERGENCE, EXIT_OK};
