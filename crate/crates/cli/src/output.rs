//! CSV tables, JSON metadata and state dumps.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;
use crate::experiments::{MleSummary, StateDump};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Metadata<'a, P: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub parameters: &'a P,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mle: Option<MleSummary>,
    pub files: Vec<String>,
}

impl<'a, P: Serialize> Metadata<'a, P> {
    pub fn new(command: &'a str, seed: u64, parameters: &'a P) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            parameters,
            mle: None,
            files: Vec::new(),
        }
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<V: Serialize + ?Sized>(path: &Path, value: &V) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct StateFile<'a> {
    schema_version: u32,
    states: &'a [StateDump],
}

pub fn write_states(path: &Path, states: &[StateDump]) -> CliResult<()> {
    write_json(
        path,
        &StateFile {
            schema_version: SCHEMA_VERSION,
            states,
        },
    )
}
