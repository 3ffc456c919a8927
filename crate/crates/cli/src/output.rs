use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA: &str = "fireline-uq/1";

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    report: &'a T,
}

pub fn to_json<T: Serialize>(command: &'static str, config: &RunConfig, report: &T) -> Result<String, CliError> {
    let envelope = Envelope { schema: SCHEMA, command, config, report };
    let mut text = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Internal(format!("serializing report: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes the report to `--out` if given, otherwise to stdout.
pub fn emit<T: Serialize>(command: &'static str, config: &RunConfig, report: &T) -> Result<(), CliError> {
    match &config.out {
        Some(path) => write_file(path, to_json(command, config, report)?.as_bytes()),
        None => print(command, config, report),
    }
}

pub fn print<T: Serialize>(command: &'static str, config: &RunConfig, report: &T) -> Result<(), CliError> {
    let text = to_json(command, config, report)?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Internal(format!("writing stdout: {e}")))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
