//! Output files: CSV tables and JSON documents, each carrying a metadata
//! header with the units convention, the parameters of the run and the
//! component versions.
//!
//! The CSV metadata header is a single `#`-prefixed JSON line; everything
//! below it (the data section) is byte-reproducible for fixed inputs and
//! seed. The timestamp lives only in the header. JSON documents keep the
//! same split under the `meta` and `data` keys.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::{json, Value};

/// Numbers are written with nine significant digits, '.' decimal point,
/// no locale.
pub fn fmt_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    format!("{x:.8e}")
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Field {
    Number(f64),
    Integer(i64),
    Text(String),
    Empty,
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Number(x) => fmt_number(*x),
            Field::Integer(i) => i.to_string(),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }
}

fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Metadata header common to every output file.
pub fn metadata(command: &str, parameters: Value) -> Value {
    json!({
        "tool": "solimg",
        "command": command,
        "versions": { "core": solimg::VERSION, "cli": crate::CLI_VERSION },
        "units": solimg::units::UNITS_LABEL,
        "parameters": parameters,
        "timestamp": unix_timestamp(),
    })
}

/// Destination for an output document: a file path or standard output.
#[derive(Debug, Clone)]
pub enum Sink {
    Path(PathBuf),
    Stdout,
}

impl Sink {
    pub fn from_option(path: &Option<PathBuf>) -> Self {
        match path {
            Some(p) => Sink::Path(p.clone()),
            None => Sink::Stdout,
        }
    }

    fn write_all(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match self {
            Sink::Path(path) => {
                if let Some(dir) = path.parent() {
                    if !dir.as_os_str().is_empty() {
                        std::fs::create_dir_all(dir)
                            .with_context(|| format!("creating {}", dir.display()))?;
                    }
                }
                std::fs::write(path, bytes)
                    .with_context(|| format!("writing {}", path.display()))
            }
            Sink::Stdout => {
                std::io::stdout().write_all(bytes).context("writing to stdout")
            }
        }
    }
}

/// Write a CSV document: `# <metadata json>` header line, column header,
/// then one line per row.
pub fn write_csv(
    sink: &Sink,
    meta: Value,
    columns: &[&str],
    rows: &[Vec<Field>],
) -> anyhow::Result<()> {
    let mut text = String::new();
    text.push_str("# ");
    text.push_str(&meta.to_string());
    text.push('\n');
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let line: Vec<String> = row.iter().map(Field::render).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    sink.write_all(text.as_bytes())
}

/// Write a JSON document `{ "meta": ..., "data": ... }`.
pub fn write_json(sink: &Sink, meta: Value, data: Value) -> anyhow::Result<()> {
    let doc = json!({ "meta": meta, "data": data });
    let mut text = serde_json::to_string_pretty(&doc).context("serializing JSON")?;
    text.push('\n');
    sink.write_all(text.as_bytes())
}

/// Strip the metadata header from CSV text, returning the data section
/// (used by the determinism checks).
pub fn data_section(csv_text: &str) -> String {
    csv_text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

/// Extract the `data` object from a JSON document produced by
/// [`write_json`].
pub fn json_data_section(text: &str) -> anyhow::Result<Value> {
    let doc: Value = serde_json::from_str(text).context("parsing JSON document")?;
    Ok(doc.get("data").cloned().unwrap_or(Value::Null))
}
