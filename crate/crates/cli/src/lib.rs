//! Configuration, output formats and commands of the `lbra` tool.

pub mod app;
pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use error::CliError;
