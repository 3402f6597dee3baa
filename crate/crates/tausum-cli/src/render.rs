//! Report rendering: fixed-schema CSV and a JSON mirror.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! value parses back to the identical bits and renders identically on every
//! platform — the reproducibility contract leans on this.

use serde::Serialize;

/// Shortest round-trip decimal form of a float.
pub fn float(v: f64) -> String {
    format!("{v}")
}

/// Optional float; empty cell when absent.
pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// Assemble a CSV document: fixed header, one line per row, `\n` endings.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match header");
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
