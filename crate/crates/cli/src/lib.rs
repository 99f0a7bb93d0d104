//! Library behind the `ace` command-line tool.

pub mod commands;
pub mod dataio;
pub mod error;
pub mod output;
pub mod scenario;

pub use error::{CliError, CliResult};
