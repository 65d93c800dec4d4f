//! File and stream output: 17-significant-digit CSV with a reproducibility
//! header, pretty JSON, and atomic writes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::Failure;

pub const ARTIFACT: &str = concat!("cubint ", env!("CARGO_PKG_VERSION"));

/// Round-trip-exact decimal form of a double.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(comments: &[String], columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {ARTIFACT}\n"));
    for line in comments {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json<T: Serialize>(doc: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| Failure::Solver(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes to the path via a same-directory temp file and rename, or to
/// stdout when no path is given.
pub fn write_out(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Solver(format!("write failed: {e}"));
    match path {
        None => io::stdout().write_all(content.as_bytes()).map_err(io_err),
        Some(p) => {
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".tmp");
            fs::write(&tmp, content).map_err(io_err)?;
            fs::rename(&tmp, p).map_err(io_err)
        }
    }
}
