use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "sweep,loglik,b,live_aspects,millis";

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub sweep: usize,
    pub loglik: f64,
    /// Lexicon strength after the sweep; `None` for models without one.
    pub b: Option<f64>,
    pub live_aspects: usize,
    pub millis: u64,
}

/// Per-sweep training trace. Rows are only ever appended.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceLog {
    pub rows: Vec<TraceRow>,
}

impl TraceLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: TraceLog) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let b = r.b.map(|b| b.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", r.sweep, r.loglik, b, r.live_aspects, r.millis);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(Error::invalid("trace must start with its header line"));
        }
        let bad = |n: usize| Error::invalid(format!("malformed trace row {}", n + 2));
        let rows = lines
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(n, line)| {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 5 {
                    return Err(bad(n));
                }
                Ok(TraceRow {
                    sweep: f[0].parse().map_err(|_| bad(n))?,
                    loglik: f[1].parse().map_err(|_| bad(n))?,
                    b: if f[2].is_empty() { None } else { Some(f[2].parse().map_err(|_| bad(n))?) },
                    live_aspects: f[3].parse().map_err(|_| bad(n))?,
                    millis: f[4].parse().map_err(|_| bad(n))?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TraceLog { rows })
    }

    /// Writes the CSV, or appends the rows when the file already exists (resume).
    pub fn write(&self, path: &Path, append: bool) -> Result<()> {
        use std::io::Write;
        let exists = path.exists();
        let mut text = self.to_csv();
        if append && exists {
            text = text[TRACE_HEADER.len() + 1..].to_string();
        }
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .write(true)
            .append(append && exists)
            .truncate(!(append && exists))
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }
}
