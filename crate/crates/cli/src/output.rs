use std::io::Write;
use std::path::Path;

use qmetric_core::MetricMatrix;
use serde_json::Value;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// `m_0_0, m_0_1, …` for a `p × p` matrix.
pub fn matrix_header(p: usize) -> Vec<String> {
    (0..p).flat_map(|k| (0..p).map(move |l| format!("m_{k}_{l}"))).collect()
}

pub fn matrix_cells(m: &MetricMatrix) -> Vec<String> {
    m.rows().into_iter().flatten().map(real).collect()
}

pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    /// First failing assertion of a verification suite.
    pub suite_failure: Option<String>,
}

impl Report {
    pub fn json(json: Value) -> Self {
        Report {
            json,
            table: None,
            suite_failure: None,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render(&self, format: Format, command: &str) -> Result<String, Failure> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)
                    .map_err(|e| Failure::validation(format!("--format: {e}")))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self
                .table
                .as_ref()
                .map(Table::render)
                .ok_or_else(|| Failure::validation(format!("--format: csv is not available for '{command}'"))),
        }
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::validation(format!("--output: cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::validation(format!("stdout: {e}")))
        }
    }
}
