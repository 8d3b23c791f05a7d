use std::fmt::Write as _;

use longmem::Warning;
use serde::Serialize;
use serde_json::Value;

use crate::args::OutputFormat;
use crate::input::InputInfo;

/// Bumped only on breaking changes to the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything a subcommand produced, before it is rendered.
pub struct Report {
    pub results: Value,
    pub table: String,
    pub csv: String,
    /// Two-column numeric text for `--out`.
    pub curve: Option<String>,
    pub inputs: Vec<InputInfo>,
    pub warnings: Vec<Warning>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a [String],
    inputs: &'a [InputInfo],
    results: &'a Value,
    warnings: &'a [Warning],
}

impl Report {
    pub fn render(&self, format: OutputFormat, argv: &[String]) -> String {
        match format {
            OutputFormat::Json => {
                let env = Envelope {
                    schema_version: SCHEMA_VERSION,
                    command: argv,
                    inputs: &self.inputs,
                    results: &self.results,
                    warnings: &self.warnings,
                };
                let mut s = serde_json::to_string_pretty(&env).expect("envelope serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.csv.clone(),
            OutputFormat::Table => {
                let mut s = self.table.clone();
                for w in &self.warnings {
                    let _ = writeln!(s, "warning {w}");
                }
                s
            }
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

/// Fixed-precision cell for tables.
pub fn num(x: f64) -> String {
    format!("{x:.4}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), num)
}

/// Left-aligned label column, right-aligned value columns.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, c) in cells.enumerate() {
            if i == 0 {
                let _ = write!(s, "{c:<w$}", w = width[0]);
            } else {
                let _ = write!(s, "  {c:>w$}", w = width[i]);
            }
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(&mut header.iter().copied());
    for r in rows {
        debug_assert_eq!(r.len(), cols);
        out.push_str(&line(&mut r.iter().map(String::as_str)));
    }
    out
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}
