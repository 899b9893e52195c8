//! Reproducible experiment runners behind the `orthofilter` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use error::{CliError, CliResult};
