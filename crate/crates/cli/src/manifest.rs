use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
struct Row {
    event_id: String,
    gt_path: PathBuf,
    stack_path: PathBuf,
}

/// One manifest line with paths resolved against the manifest's directory.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub event_id: String,
    pub gt_path: PathBuf,
    pub stack_path: PathBuf,
}

pub const HEADER: [&str; 3] = ["event_id", "gt_path", "stack_path"];

pub fn read(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(bad(format!("expected header {}", HEADER.join(","))));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.event_id.is_empty() {
            return Err(bad("empty event_id".into()));
        }
        entries.push(ManifestEntry {
            event_id: row.event_id,
            gt_path: base.join(row.gt_path),
            stack_path: base.join(row.stack_path),
        });
    }
    Ok(entries)
}

pub fn write(path: &Path, rows: &[(String, String, String)]) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut writer = csv::Writer::from_path(path).map_err(fail)?;
    writer.write_record(HEADER).map_err(fail)?;
    for (id, gt, stack) in rows {
        writer.write_record([id, gt, stack]).map_err(fail)?;
    }
    writer.flush().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
