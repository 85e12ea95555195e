use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use serde_json::{json, Value};
use specdet::Error;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A CSV table; every cell is already formatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Failure::Input(format!("cannot write CSV: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Failure::Input(format!("cannot write CSV: {e}")))
    }

    pub fn write_file(&self, path: &Path) -> Result<(), Failure> {
        let file = std::fs::File::create(path)
            .map_err(|e| Failure::Input(format!("cannot create {}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(file))
    }
}

/// What a command produces: a JSON object and the same data as a table.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub table: Table,
    /// Set when an internal cross-check failed; the report is still printed.
    pub disagreement: Option<String>,
}

/// Shortest representation that parses back to the same `f64`, in
/// scientific notation outside `[1e-4, 1e16)`.
pub fn num(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn print_stdout(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::Input(format!("cannot write to stdout: {e}")))
        }
        _ => Ok(()),
    }
}

pub fn emit(report: &Report, format: Format, start: Instant) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let mut value = report.json.clone();
            if let Value::Object(map) = &mut value {
                map.insert(
                    "meta".into(),
                    json!({
                        "version": env!("CARGO_PKG_VERSION"),
                        "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
                    }),
                );
            }
            let text = serde_json::to_string_pretty(&value)
                .map_err(|e| Failure::Input(format!("cannot serialise output: {e}")))?;
            print_stdout(format!("{text}\n").as_bytes())
        }
        Format::Csv => {
            let mut buf = Vec::new();
            report.table.write_to(&mut buf)?;
            print_stdout(&buf)
        }
    }
}

pub fn print_error_payload(e: &Error) {
    let ladder: Vec<Value> = match e {
        Error::Solver { ladder, .. } => ladder
            .iter()
            .map(|&(h, miss)| json!({ "H": h, "miss": miss }))
            .collect(),
        _ => Vec::new(),
    };
    let payload = json!({
        "error": {
            "class": "solver",
            "message": e.to_string(),
            "ladder": ladder,
        }
    });
    if let Ok(text) = serde_json::to_string_pretty(&payload) {
        let _ = print_stdout(format!("{text}\n").as_bytes());
    }
}
