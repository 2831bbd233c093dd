//! Library side of the `fdp` command: input parsing, output tables and
//! command dispatch.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod output;

pub use commands::{run, Cli, Emission};
pub use error::{CliError, CliResult};
