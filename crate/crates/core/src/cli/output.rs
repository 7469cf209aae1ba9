use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::error::{invalid, Result};
use crate::scenario::{format_sig, to_json_string};

/// Significant digits in every number the CLI writes.
pub const DIGITS: usize = 15;

pub fn num(v: f64) -> String {
    format_sig(v, DIGITS)
}

pub fn json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = to_json_string(v, DIGITS, true)?;
    s.push('\n');
    Ok(s)
}

/// A CSV table built row by row.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Num(v) => num(v),
                    Cell::Text(s) => s,
                    Cell::Empty => String::new(),
                })
                .collect(),
        );
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| invalid("csv", e.to_string());
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| invalid("csv", e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Files a command produces, in the order they are printed.
#[derive(Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    /// Writes every file plus `manifest.json` into `dir`.
    pub fn write_all(&self, dir: &Path, manifest: &serde_json::Value) -> Result<Vec<String>> {
        let io = |e: std::io::Error| invalid("out", format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        let mut names = Vec::new();
        for (name, body) in &self.files {
            fs::write(dir.join(name), body).map_err(io)?;
            names.push(name.clone());
        }
        let mut m = manifest.clone();
        m["files"] = json!(names);
        fs::write(dir.join("manifest.json"), json(&m)?).map_err(io)?;
        names.push("manifest.json".into());
        Ok(names)
    }
}

/// Best rational `p/q` with `q <= max_den` within `tol` of `v`, if any.
pub fn rational(v: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = v;
    for _ in 0..40 {
        let a = x.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = (ai as u64).checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - v).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = x - a;
        if frac == 0.0 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}
