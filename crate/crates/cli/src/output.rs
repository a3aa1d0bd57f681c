//! JSON and CSV emission.
//!
//! With `--out PATH` the primary artifact goes to `PATH` and a CSV companion,
//! if any, to the same path with a `.csv` extension. Without it the primary
//! artifact goes to standard output.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::exit::Failure;

pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::io)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(Failure::io),
        None => io::stdout().write_all(text.as_bytes()).map_err(Failure::io),
    }
}

pub fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<(), Failure> {
    match out {
        Some(p) => csv_rows(File::create(p).map_err(Failure::io)?, rows),
        None => csv_rows(io::stdout().lock(), rows),
    }
}

/// CSV written next to a JSON artifact; skipped when the JSON went to stdout.
pub fn write_companion_csv<T: Serialize>(json_out: Option<&Path>, rows: &[T]) -> Result<Option<PathBuf>, Failure> {
    let Some(p) = json_out else { return Ok(None) };
    let csv_path = companion(p);
    write_csv(Some(&csv_path), rows)?;
    Ok(Some(csv_path))
}

pub fn companion(p: &Path) -> PathBuf {
    p.with_extension("csv")
}

fn csv_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<(), Failure> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(Failure::io)?;
    }
    wtr.flush().map_err(Failure::io)
}

/// Joins a list into one CSV cell.
pub fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}
