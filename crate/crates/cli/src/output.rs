//! Deterministic CSV and key=value writers.

use crate::error::{CliError, Result};
use std::fmt::Write as _;
use std::path::Path;
use tunnel_core::observables::{CurrentField, DensityField};

/// Shortest-form decimal with 12 significant digits, like C's `%.12g`.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp).max(0) as usize, v);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// A small CSV table with a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row of already formatted cells.
    pub fn push(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }
}

pub fn density_csv(field: &DensityField) -> String {
    let mut t = Table::new(&["x1", "x2", "value"]);
    // fields are kept sorted by site
    for (s, v) in &field.values {
        t.push(&[s.x1.to_string(), s.x2.to_string(), fmt_sig(*v)]);
    }
    t.render()
}

pub fn current_csv(field: &CurrentField) -> String {
    let mut t = Table::new(&["x1", "x2", "y1", "y2", "value"]);
    for ((x, y), v) in &field.values {
        t.push(&[x.x1.to_string(), x.x2.to_string(), y.x1.to_string(), y.x2.to_string(), fmt_sig(*v)]);
    }
    t.render()
}

/// `x1,x2,value`, rows sorted by site, LF endings.
pub fn write_density_csv(field: &DensityField, path: &Path) -> Result<()> {
    write_file(path, &density_csv(field))
}

/// `x1,x2,y1,y2,value` with x < y lexicographically.
pub fn write_current_csv(field: &CurrentField, path: &Path) -> Result<()> {
    write_file(path, &current_csv(field))
}

/// Ordered key=value report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.set(key, fmt_sig(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }

    /// Parse a rendered report back (for tests and tooling).
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }
}
