//! Report files. Floats are written with Rust's shortest round-trip
//! formatting, so CSV and JSON carry bit-identical numbers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use xplab_core::experiment::{ExperimentReport, GrowthRow};

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "epsilon",
    "s1_diff_norm",
    "perturbation_s1",
    "sup_norm",
    "besov_estimate",
    "besov_tail_bound",
    "ratio",
    "closed_form_ratio",
    "wall_time_ms",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_record(r: &GrowthRow) -> [String; 10] {
    [
        r.n.to_string(),
        r.epsilon.to_string(),
        r.s1_diff_norm.to_string(),
        r.perturbation_s1.to_string(),
        r.sup_norm.to_string(),
        opt(r.besov_estimate),
        opt(r.besov_tail_bound),
        r.ratio.to_string(),
        r.closed_form_ratio.to_string(),
        r.wall_time_ms.to_string(),
    ]
}

/// Header plus one row per size, LF line endings. Missing Besov values are
/// empty fields.
pub fn write_growth_csv<W: Write>(out: W, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Opens a report destination; `-` is stdout.
pub fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(std::io::stdout()));
    }
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(Box::new(BufWriter::new(f)))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Rows back from CSV, for round-trip checks.
pub fn read_growth_csv(text: &str) -> Result<Vec<GrowthRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let parse_opt = |s: &str| -> Result<Option<f64>> {
        Ok(if s.is_empty() { None } else { Some(s.parse()?) })
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse()?) };
        rows.push(GrowthRow {
            n: rec[0].parse()?,
            epsilon: f(1)?,
            s1_diff_norm: f(2)?,
            perturbation_s1: f(3)?,
            sup_norm: f(4)?,
            besov_estimate: parse_opt(&rec[5])?,
            besov_tail_bound: parse_opt(&rec[6])?,
            ratio: f(7)?,
            closed_form_ratio: f(8)?,
            wall_time_ms: f(9)?,
        });
    }
    Ok(rows)
}
