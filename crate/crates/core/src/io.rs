//! Result files. Every document carries a schema version, the library version and
//! the resolved configuration that produced it; files are written atomically.
//!
//! CSV documents put the metadata in leading `#` comment lines:
//!
//! ```text
//! # schema_version: 1
//! # version: slelab 0.1.0
//! # config: {"kappa":2.0,...}
//! a,slope,stderr,ims_pred
//! ...
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub fn version_string() -> String {
    format!("slelab {}", crate::VERSION)
}

/// A table of result rows. `footer` rows may have their own column set.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub footer: Option<(Vec<String>, Vec<f64>)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), footer: None }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn with_footer(mut self, columns: &[&str], values: Vec<f64>) -> Self {
        self.footer = Some((columns.iter().map(|c| c.to_string()).collect(), values));
        self
    }

    /// Rows as JSON objects keyed by column name.
    fn records(&self) -> Value {
        let obj = |cols: &[String], vals: &[f64]| {
            Value::Object(cols.iter().cloned().zip(vals.iter().map(|v| float_json(*v))).collect())
        };
        let rows: Vec<Value> = self.rows.iter().map(|r| obj(&self.columns, r)).collect();
        let mut out = serde_json::Map::new();
        out.insert("rows".into(), Value::Array(rows));
        if let Some((cols, vals)) = &self.footer {
            out.insert("summary".into(), obj(cols, vals));
        }
        Value::Object(out)
    }
}

fn float_json(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(v.to_string()))
}

pub fn csv_document<C: Serialize>(config: &C, table: &Table) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# schema_version: {SCHEMA_VERSION}\n"));
    out.push_str(&format!("# version: {}\n", version_string()));
    out.push_str(&format!("# config: {}\n", serde_json::to_string(config)?));
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    if let Some((cols, vals)) = &table.footer {
        w.write_record(cols)?;
        w.write_record(vals.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

pub fn json_document<C: Serialize>(config: &C, table: &Table) -> Result<String> {
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "version": version_string(),
        "config": config,
        "result": table.records(),
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Domain(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

/// Parses the data rows of a CSV document, skipping `#` comment lines. The header
/// row is returned first.
pub fn read_csv_rows(text: &str) -> Result<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(|rec| Ok(rec?.iter().map(str::to_string).collect())).collect()
}
