//! Rendering of command results to standard output, and the files
//! `simulate` writes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use relaysim_core::simcore::{dominance_stats, SimReport};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
    JsonLines,
}

/// A titled grid of cells. Numbers stay numbers until rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(title: &str, headers: &[&str]) -> Self {
        Self { title: title.to_string(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    /// Two-column key/value table.
    pub fn key_value(title: &str) -> Self {
        Self::new(title, &["key", "value"])
    }

    pub fn row(&mut self, cells: Vec<Value>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
        self
    }

    pub fn kv(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.row(vec![Value::from(key), value.into()])
    }
}

pub fn render(tables: &[Table], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Table => {
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                render_aligned(t, &mut out);
            }
        }
        Format::Csv => {
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&t.headers).expect("in-memory write");
                for row in &t.rows {
                    w.write_record(row.iter().map(cell_text)).expect("in-memory write");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"));
            }
        }
        Format::JsonLines => {
            for t in tables {
                for row in &t.rows {
                    let mut obj = Map::new();
                    obj.insert("table".into(), Value::from(t.title.clone()));
                    for (h, v) in t.headers.iter().zip(row) {
                        obj.insert(h.clone(), v.clone());
                    }
                    out.push_str(&Value::Object(obj).to_string());
                    out.push('\n');
                }
            }
        }
    }
    out
}

fn render_aligned(t: &Table, out: &mut String) {
    let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(display_cell).collect()).collect();
    let key_value = t.headers == ["key", "value"];
    let mut widths: Vec<usize> = if key_value { vec![0; 2] } else { t.headers.iter().map(|h| h.len()).collect() };
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let _ = writeln!(out, "{}", t.title);
    let line = |cols: &[String], out: &mut String| {
        let mut s = String::new();
        for (i, (c, w)) in cols.iter().zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{c:<w$}");
        }
        let _ = writeln!(out, "  {}", s.trim_end());
    };
    if !key_value {
        line(&t.headers, out);
    }
    for row in &cells {
        line(row, out);
    }
}

/// Exact text for machine formats: shortest round-trip floats, empty for null.
fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if !n.is_i64() && !n.is_u64() => f.to_string(),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Readable text for the aligned table.
fn display_cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) if !n.is_i64() && !n.is_u64() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        _ => cell_text(v),
    }
}

/// Seven significant figures, switching to exponent form outside `[1e-3, 1e7)`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if (1e-3..1e7).contains(&a) {
        let decimals = (6 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.6e}")
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(contents))
        .map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct BlockRow<'a> {
    id: usize,
    parent: usize,
    miner: &'a str,
    time: f64,
    height: u64,
    on_main_chain: bool,
}

#[derive(Serialize)]
struct TxRow {
    id: usize,
    created: f64,
    confirmed: Option<f64>,
    latency: Option<f64>,
}

pub fn blocks_csv(report: &SimReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.blocks.is_empty() {
        w.write_record(["id", "parent", "miner", "time", "height", "on_main_chain"]).expect("in-memory write");
    }
    for b in &report.blocks {
        w.serialize(BlockRow {
            id: b.id,
            parent: b.parent,
            miner: &report.nodes[b.miner].id,
            time: b.time,
            height: b.height,
            on_main_chain: b.on_main_chain,
        })
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn transactions_csv(report: &SimReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.transactions.is_empty() {
        w.write_record(["id", "created", "confirmed", "latency"]).expect("in-memory write");
    }
    for t in &report.transactions {
        w.serialize(TxRow { id: t.id, created: t.created, confirmed: t.confirmed, latency: t.latency })
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Per-node counts and shares as a table.
pub fn dominance_table(report: &SimReport) -> Table {
    let mut t = Table::new(
        "nodes",
        &["node", "mined", "main_chain", "stale", "reorgs", "main_chain_share", "stale_fraction"],
    );
    for (n, d) in report.nodes.iter().zip(dominance_stats(report)) {
        t.row(vec![
            n.id.clone().into(),
            n.mined.into(),
            n.main_chain.into(),
            n.stale.into(),
            n.reorgs.into(),
            d.main_chain_share.into(),
            d.stale_fraction.into(),
        ]);
    }
    t
}
