//! Library half of the `tcm` binary: argument parsing, the class number
//! cache and output formatting.

pub mod cache;
pub mod commands;
pub mod error;
pub mod output;

pub use commands::{run, Cli};
pub use error::CliError;
