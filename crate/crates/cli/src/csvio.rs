//! CSV files with a leading schema-version line.
//!
//! Every file starts with `# mtp-csv schema=<version> kind=<kind>`, followed by
//! a column header and the data rows.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "# mtp-csv";

pub struct CsvTable {
    pub kind: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(kind: &str, header: &[&str]) -> Self {
        Self {
            kind: kind.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut out = BufWriter::new(out);
        writeln!(out, "{MAGIC} schema={SCHEMA_VERSION} kind={}", self.kind).map_err(io_err)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        self.write_to(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(io_err)?;
        let kind = parse_preamble(first.trim_end())?;
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Self { kind, header, rows })
    }
}

fn parse_preamble(line: &str) -> Result<String, CliError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| CliError::Runtime("missing schema line".into()))?;
    let mut version = None;
    let mut kind = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("schema=") {
            version = v.parse::<u32>().ok();
        } else if let Some(k) = field.strip_prefix("kind=") {
            kind = Some(k.to_string());
        }
    }
    match version {
        Some(SCHEMA_VERSION) => kind.ok_or_else(|| CliError::Runtime("schema line has no kind".into())),
        Some(v) => Err(CliError::Runtime(format!(
            "unsupported CSV schema version {v} (expected {SCHEMA_VERSION})"
        ))),
        None => Err(CliError::Runtime("unreadable CSV schema version".into())),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}
