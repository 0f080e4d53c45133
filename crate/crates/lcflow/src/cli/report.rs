//! CSV and JSON reports and the JSON-lines run log.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::Config;
use crate::error::Result;

pub const SCHEMA: &str = "lcflow-report";
pub const SCHEMA_VERSION: u32 = 1;

/// Formats a number the way every report does.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Column table whose cells are already formatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }
}

/// Writes reports for one command into an output directory.
pub struct Reporter<'a> {
    pub dir: PathBuf,
    pub command: &'a str,
    pub config: &'a Config,
}

impl Reporter<'_> {
    fn header_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# schema {SCHEMA} {SCHEMA_VERSION}"),
            format!("# command {}", self.command),
        ];
        out.extend(
            self.config
                .entries()
                .map(|(k, v)| format!("# config {k} = {v}")),
        );
        out
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// `<name>` CSV with the schema and config as `#` lines above the header.
    pub fn write_csv(&self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        for l in self.header_lines() {
            writeln!(w, "{l}")?;
        }
        writeln!(w, "{}", table.columns.join(","))?;
        for r in &table.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        w.flush()?;
        Ok(path)
    }

    /// `<name>` JSON holding the schema, config and `summary`.
    pub fn write_json(&self, name: &str, summary: Value) -> Result<PathBuf> {
        let path = self.path(name);
        let config: serde_json::Map<String, Value> = self
            .config
            .entries()
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect();
        let doc = json!({
            "schema": SCHEMA,
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": config,
            "summary": summary,
        });
        let mut text =
            serde_json::to_string_pretty(&doc).map_err(|e| crate::Error::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// One JSON object per line.
pub struct RunLog {
    w: Option<BufWriter<File>>,
}

impl RunLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(RunLog {
            w: Some(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn disabled() -> Self {
        RunLog { w: None }
    }

    pub fn event(&mut self, event: &str, data: Value) {
        if let Some(w) = &mut self.w {
            let line = json!({ "event": event, "data": data });
            // the log is best effort; reports carry the results
            let _ = writeln!(w, "{line}").and_then(|_| w.flush());
        }
    }
}
