//! Plain-text trace output: CSV rows and `key=value` sidecars.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{IterateTrace, Observer, TraceMeta, TraceRow};

pub const TRACE_HEADER: &str = "n,dist,H,eps,objective,residual";

/// 17 significant digits, `.` decimal separator.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn field(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn format_row(row: &TraceRow) -> String {
    format!(
        "{},{},{},{},{},{}",
        row.n,
        field(row.dist),
        field(row.h),
        field(row.eps),
        field(row.objective),
        field(row.residual)
    )
}

/// Streams rows as they are produced, flushing after each one so an
/// interrupted run leaves a readable prefix.
pub struct CsvTrace<W: Write> {
    w: W,
}

impl<W: Write> CsvTrace<W> {
    pub fn new(mut w: W) -> io::Result<Self> {
        writeln!(w, "{TRACE_HEADER}")?;
        w.flush()?;
        Ok(CsvTrace { w })
    }

    pub fn into_inner(self) -> W {
        self.w
    }
}

impl CsvTrace<BufWriter<File>> {
    pub fn create(path: &Path) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> Observer for CsvTrace<W> {
    fn on_row(&mut self, row: &TraceRow) -> Result<()> {
        writeln!(self.w, "{}", format_row(row))?;
        self.w.flush()?;
        Ok(())
    }
}

pub fn write_trace<W: Write>(w: W, trace: &IterateTrace) -> io::Result<()> {
    let mut csv = CsvTrace::new(w)?;
    for row in &trace.rows {
        writeln!(csv.w, "{}", format_row(row))?;
    }
    csv.w.flush()
}

fn parse_field(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::InvalidArgument(format!("line {line}: bad number '{s}'")))
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "unexpected trace header {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(Error::InvalidArgument(format!(
                    "line {}: expected 6 fields",
                    i + 2
                )));
            }
            let n = cols[0]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("line {}: bad index", i + 2)))?;
            Ok(TraceRow {
                n,
                dist: parse_field(cols[1], i + 2)?,
                h: parse_field(cols[2], i + 2)?,
                eps: parse_field(cols[3], i + 2)?,
                objective: parse_field(cols[4], i + 2)?,
                residual: parse_field(cols[5], i + 2)?,
            })
        })
        .collect()
}

/// Sidecar entries describing a run.
pub fn meta_entries(meta: &TraceMeta) -> Vec<(String, String)> {
    vec![
        ("regime".into(), meta.regime.to_string()),
        ("sigma".into(), format_float(meta.steps.sigma)),
        ("tau".into(), format_float(meta.steps.tau)),
        ("theta".into(), format_float(meta.steps.theta)),
        (
            "seed".into(),
            meta.seed.map(|s| s.to_string()).unwrap_or_default(),
        ),
    ]
}

pub fn write_key_values<W: Write>(mut w: W, entries: &[(String, String)]) -> io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()
}

/// Parses `key=value` lines; blank lines and lines starting with `#` are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Path of the metadata sidecar belonging to a trace file.
pub fn sidecar_path(trace: &Path) -> std::path::PathBuf {
    let mut s = trace.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_formatting() {
        let row = TraceRow {
            n: 3,
            dist: Some(0.5),
            h: None,
            eps: None,
            objective: Some(-1.0),
            residual: Some(0.0),
        };
        assert_eq!(
            format_row(&row),
            "3,5.0000000000000000e-1,,,-1.0000000000000000e0,0.0000000000000000e0"
        );
        let text = format!("{TRACE_HEADER}\n{}\n", format_row(&row));
        assert_eq!(parse_trace_csv(&text).unwrap(), vec![row]);
    }

    #[test]
    fn full_precision_round_trip() {
        let v = 0.1 + 0.2;
        assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn key_values() {
        let m = parse_key_values("# c\nsigma = 0.1\n\nseed=4\n").unwrap();
        assert_eq!(m["sigma"], "0.1");
        assert_eq!(m["seed"], "4");
        assert!(parse_key_values("oops").is_err());
    }
}
