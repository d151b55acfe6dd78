//! CSV and JSON emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bubqkd::{Provenance, SweepResult};
use serde::Serialize;

use crate::CliError;

/// Marker written in place of a value the model leaves undefined.
pub const INVALID: &str = "invalid";

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Shortest decimal rendering with [`SIGNIFICANT_DIGITS`] significant digits.
///
/// Plain notation for exponents in `-5..12`, scientific otherwise. Rust's
/// float formatting ignores locale, so the decimal point is always `.`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| INVALID.to_string(), fmt_sig)
}

/// `dir/stem.csv` → `dir/stem<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Output(format!("writing {}: {e}", path.display()))
}

fn provenance_lines(p: &Provenance) -> Vec<String> {
    let mut lines = vec![
        format!("# toolkit: {} {}", p.toolkit, p.version),
        format!("# seed: {}", p.seed.map_or("none".to_string(), |s| s.to_string())),
    ];
    lines.extend(p.config.iter().map(|(k, v)| format!("# config.{k}: {v}")));
    lines
}

/// Writes a header and rows, preceded by `#` provenance lines.
pub fn write_csv(path: &Path, provenance: &Provenance, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = create(path)?;
    for line in provenance_lines(provenance) {
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(|e| CliError::Output(format!("writing {}: {e}", path.display())))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::Output(format!("writing {}: {e}", path.display())))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// CSV header and rows for a sweep. Coordinates named in `integer_axes` are
/// written without a fractional part.
pub fn sweep_table(sweep: &SweepResult, integer_axes: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = sweep.axis_labels.iter().chain(&sweep.columns).cloned().collect();
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            let coords = r.coords.iter().zip(&sweep.axis_labels).map(|(c, label)| {
                if integer_axes.contains(&label.as_str()) {
                    format!("{}", *c as i64)
                } else {
                    fmt_sig(*c)
                }
            });
            coords.chain(r.values.iter().map(|v| fmt_cell(*v))).collect()
        })
        .collect();
    (header, rows)
}
