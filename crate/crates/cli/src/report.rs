//! Rendering of command reports as text tables, CSV or JSON.
//!
//! Machine formats carry 12 significant digits and a `schema_version`
//! field; text tables show 6.

use std::io::Write;

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

pub fn sig12(x: f64) -> f64 {
    round_sig(x, 12)
}

/// Human-readable number with 6 significant digits.
pub fn fmt6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r = round_sig(x, 6);
    if r != 0.0 && (r.abs() >= 1e9 || r.abs() < 1e-4) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

/// Something that renders in all three formats.
pub trait Report {
    fn write_text(&self, out: &mut dyn Write) -> Result<(), CliError>;
    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError>;
    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError>;

    fn render(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Text => self.write_text(out),
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn render_to_string(&self, format: Format) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.render(format, &mut buf)?;
        String::from_utf8(buf).map_err(|e| CliError::Output(e.to_string()))
    }
}

pub(crate) fn write_csv_rows<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_json_value<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Left-aligned columns padded to the widest cell.
pub(crate) fn write_table(header: &[&str], rows: &[Vec<String>], out: &mut dyn Write) -> Result<(), CliError> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}
