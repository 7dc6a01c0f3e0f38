//! CSV/JSON emission with a metadata header.

use std::io::Write;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            // 17 significant digits.
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Text(s) => json!(s),
            _ => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra results that do not fit the row layout (moments, fits).
    pub summary: Option<Value>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), summary: None }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Canonical JSON of the resolved config and its SHA-256.
pub fn digest(config: &RunConfig) -> (Value, String) {
    let value = serde_json::to_value(config).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("json value serializes");
    let hash = Sha256::digest(canonical.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    (value, format!("sha256:{hex}"))
}

pub fn render(table: &Table, command: &str, config: &RunConfig, format: Format) -> String {
    let (config_json, digest) = digest(config);
    let version = env!("CARGO_PKG_VERSION");
    match format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!("# tool: sinrld {version}\n"));
            out.push_str(&format!("# command: {command}\n"));
            out.push_str(&format!("# config_digest: {digest}\n"));
            out.push_str(&format!("# seed: {}\n", config.mc.seed));
            out.push_str(&format!("# config: {config_json}\n"));
            if let Some(s) = &table.summary {
                out.push_str(&format!("# summary: {s}\n"));
            }
            out.push_str(&format!("# columns: {}\n", table.columns.join(",")));
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                .collect();
            let doc = json!({
                "tool": format!("sinrld {version}"),
                "command": command,
                "config_digest": digest,
                "seed": config.mc.seed,
                "config": config_json,
                "summary": table.summary.clone().unwrap_or(Value::Null),
                "columns": table.columns,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json serializes");
            s.push('\n');
            s
        }
    }
}

pub fn write(text: &str, path: Option<&str>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {p}")),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig::parse("[scenario]\nm = 1\np0 = 1.0\nreceiver = \"mmse\"\n").unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "label", "y"]);
        t.push(vec![Cell::Num(0.1), Cell::Text("BPSK".into()), Cell::Empty]);
        let text = render(&t, "pdf", &config(), Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool: sinrld "));
        assert!(lines[2].starts_with("# config_digest: sha256:"));
        assert_eq!(lines[lines.len() - 2], "x,label,y");
        assert_eq!(lines[lines.len() - 1], "1.0000000000000001e-1,BPSK,");
    }

    #[test]
    fn digest_tracks_config() {
        let a = config();
        let mut b = config();
        assert_eq!(digest(&a).1, digest(&b).1);
        b.mc.seed = 2;
        assert_ne!(digest(&a).1, digest(&b).1);
    }

    #[test]
    fn json_nulls_for_missing() {
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Num(f64::NAN)]);
        let v: Value = serde_json::from_str(&render(&t, "cdf", &config(), Format::Json)).unwrap();
        assert_eq!(v["rows"][0][0], Value::Null);
        assert_eq!(v["columns"][0], "x");
    }
}
