use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use lislnet_core::graph::{ConstellationSnapshot, SnapshotDocument};
use serde::Serialize;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_snapshot(path: &Path) -> Result<ConstellationSnapshot> {
    let doc: SnapshotDocument = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing snapshot {}", path.display()))?;
    doc.into_snapshot()
        .with_context(|| format!("validating snapshot {}", path.display()))
}

pub fn snapshot_json(snap: &ConstellationSnapshot) -> Result<String> {
    to_json(&SnapshotDocument::from_snapshot(snap))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// CSV sink without automatic headers; callers write the header row.
pub fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(sink))
}
