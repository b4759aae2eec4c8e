//! Tables, number formatting and atomic file emission.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::config::{FileConfig, Format};
use crate::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    MaybeReal(Option<f64>),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) => fmt_f64(*x),
            Cell::MaybeReal(x) => x.map(fmt_f64).unwrap_or_default(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) => json!(x),
            Cell::MaybeReal(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::MaybeReal(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

/// Compact JSON whose floats carry 17 significant digits.
struct SigFigs;

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Everything one run produces: a primary table, named JSON extras, and an
/// optional plot.
pub struct Emission {
    pub table: Table,
    pub extras: Vec<(&'static str, Value)>,
    pub svg: Option<String>,
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    out.with_file_name(format!("{stem}{suffix}"))
}

/// Files that will be written for `out` in `format`, primary first.
pub fn planned_paths(out: &Path, format: Format, extras: &[&str], plot: bool) -> Vec<PathBuf> {
    let mut paths = vec![out.to_path_buf()];
    if format == Format::Csv {
        paths.push(sibling(out, ".manifest.json"));
        paths.extend(
            extras
                .iter()
                .map(|name| sibling(out, &format!(".{name}.json"))),
        );
    }
    if plot {
        paths.push(sibling(out, ".svg"));
    }
    paths
}

fn stage(path: &Path, contents: &str) -> Result<NamedTempFile, CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    Ok(tmp)
}

/// Writes every file to a temporary sibling first and renames them into
/// place only once all of them were written.
pub fn emit(
    out: &Path,
    format: Format,
    manifest: &FileConfig,
    e: Emission,
) -> Result<Vec<PathBuf>, CliError> {
    let names: Vec<&str> = e.extras.iter().map(|(n, _)| *n).collect();
    let paths = planned_paths(out, format, &names, e.svg.is_some());
    let mut contents = Vec::new();
    match format {
        Format::Csv => {
            contents.push(e.table.to_csv());
            contents.push(to_json_string(manifest));
            contents.extend(e.extras.iter().map(|(_, v)| to_json_string(v)));
        }
        Format::Json => {
            let mut data = serde_json::Map::new();
            data.insert("table".to_string(), e.table.to_json());
            for (name, v) in e.extras {
                data.insert(name.to_string(), v);
            }
            let doc = json!({ "manifest": manifest, "data": data });
            contents.push(to_json_string(&doc));
        }
    }
    if let Some(svg) = e.svg {
        contents.push(svg);
    }
    let staged = paths
        .iter()
        .zip(&contents)
        .map(|(p, c)| stage(p, c))
        .collect::<Result<Vec<_>, _>>()?;
    for (tmp, path) in staged.into_iter().zip(&paths) {
        tmp.persist(path)
            .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    }
    Ok(paths)
}
