//! CSV and JSON-lines output, plus readers for round trips.
//!
//! Reals are written with 17 significant digits in `.`-decimal scientific
//! notation, which round-trips every `f64` exactly and never depends on
//! locale.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SCHUR_CUE_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Real(x) => x,
        }
    }
}

/// `x` with 17 significant digits, e.g. `8.5150449322407811e-1`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn format_cell(c: Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Real(x) => format_real(x),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&c| format_cell(c)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses numeric CSV as written by [`CsvTable::write`].
    pub fn read<R: BufRead>(r: R) -> io::Result<Self> {
        let mut lines = r.lines();
        let header = match lines.next() {
            Some(line) => line?.split(',').map(str::to_string).collect::<Vec<_>>(),
            None => return Err(invalid("empty CSV")),
        };
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(parse_cell)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| invalid(format!("row {}: unparseable cell in {line:?}", i + 2)))?;
            if row.len() != header.len() {
                return Err(invalid(format!("row {}: {} cells, header has {}", i + 2, row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }
}

fn parse_cell(s: &str) -> Option<Cell> {
    if let Ok(i) = s.parse::<i64>() {
        return Some(Cell::Int(i));
    }
    s.parse::<f64>().ok().map(Cell::Real)
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// One compact JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(mut w: W, items: &[T]) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(io::Error::other)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_json_lines<R: BufRead, T: DeserializeOwned>(r: R) -> io::Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| invalid(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Where output goes: an explicit path wins; otherwise `default_name` inside
/// the directory named by [`OUTPUT_DIR_ENV`]; otherwise `None` (stdout).
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| Path::new(&d).join(default_name))
}
