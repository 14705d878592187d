//! Document format and subcommands behind the `multitwist` binary.

pub mod commands;
pub mod document;
pub mod error;
pub mod specs;

pub use commands::{Format, Globals, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
pub use document::TripleDocument;
pub use error::{CliError, CliResult};
