//! Command-line front end: scenario files, reports and the subcommands.

pub mod error;
pub mod file;
pub mod output;
pub mod resolve;
pub mod run;

pub use error::CliError;
pub use file::ScenarioFile;
