//! CSV ingestion and result serialization.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`; missing values are empty CSV fields or JSON `null`.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Dataset, DatasetTables, GradeScale, IngestWarning};

/// Version of the six-file layout below.
pub const SCHEMA_VERSION: &str = "1";

pub const STUDENTS_HEADER: [&str; 3] = ["student_id", "major", "cohort"];
pub const CLASSES_HEADER: [&str; 4] = ["class_id", "course_id", "category", "semester"];
pub const REGISTRATIONS_HEADER: [&str; 2] = ["student_id", "class_id"];
pub const ATTENDANCE_HEADER: [&str; 3] = ["student_id", "class_id", "attended"];
pub const GRADES_HEADER: [&str; 3] = ["student_id", "course_id", "letter"];
pub const CATALOG_HEADER: [&str; 2] = ["category", "description"];

/// Locations of the six input tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub students: PathBuf,
    pub classes: PathBuf,
    pub registrations: PathBuf,
    pub attendance: PathBuf,
    pub grades: PathBuf,
    pub catalog: PathBuf,
}

impl DatasetFiles {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            students: dir.join("students.csv"),
            classes: dir.join("classes.csv"),
            registrations: dir.join("registrations.csv"),
            attendance: dir.join("attendance.csv"),
            grades: dir.join("grades.csv"),
            catalog: dir.join("catalog.csv"),
        }
    }
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn csv_error(path: &Path, err: csv::Error, fallback_line: u64) -> Error {
    if err.is_io_error() {
        return Error::Csv {
            file: file_label(path),
            source: err,
        };
    }
    let line = err.position().map_or(fallback_line, |p| p.line());
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => err.to_string(),
    };
    Error::integrity(&file_label(path), line, message)
}

/// Reads a headed CSV whose header must equal `header` exactly.
pub fn read_table<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let found = reader.headers().map_err(|e| csv_error(path, e, 1))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::integrity(
            &file_label(path),
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| csv_error(path, e, i as u64 + 2)))
        .collect()
}

pub fn read_tables(files: &DatasetFiles) -> Result<DatasetTables> {
    Ok(DatasetTables {
        students: read_table(&files.students, &STUDENTS_HEADER)?,
        classes: read_table(&files.classes, &CLASSES_HEADER)?,
        registrations: read_table(&files.registrations, &REGISTRATIONS_HEADER)?,
        attendance: read_table(&files.attendance, &ATTENDANCE_HEADER)?,
        grades: read_table(&files.grades, &GRADES_HEADER)?,
        catalog: read_table(&files.catalog, &CATALOG_HEADER)?,
    })
}

/// Reads and validates a dataset. Dropped or excluded records come back as
/// warnings; referential problems are `Integrity` errors naming the row.
pub fn load_dataset(
    files: &DatasetFiles,
    scale: GradeScale,
) -> Result<(Dataset, Vec<IngestWarning>)> {
    Dataset::from_tables(&read_tables(files)?, scale)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    let wrap = |e: csv::Error| Error::Csv {
        file: file_label(path),
        source: e,
    };
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the six tables into `dir`, returning the paths written.
pub fn write_tables(dir: &Path, tables: &DatasetTables) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let files = DatasetFiles::in_dir(dir);
    write_rows(&files.students, &STUDENTS_HEADER, &tables.students)?;
    write_rows(&files.classes, &CLASSES_HEADER, &tables.classes)?;
    write_rows(
        &files.registrations,
        &REGISTRATIONS_HEADER,
        &tables.registrations,
    )?;
    write_rows(&files.attendance, &ATTENDANCE_HEADER, &tables.attendance)?;
    write_rows(&files.grades, &GRADES_HEADER, &tables.grades)?;
    write_rows(&files.catalog, &CATALOG_HEADER, &tables.catalog)?;
    Ok(vec![
        files.students,
        files.classes,
        files.registrations,
        files.attendance,
        files.grades,
        files.catalog,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Shortest round-trip decimal, switching to exponent notation outside
/// [1e-6, 1e15) in magnitude. Negative zero prints as `0`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if !(1e-6..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Bool(bool),
    Missing,
}

impl Cell {
    pub fn num(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_f64(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Text(s) => serde_json::Value::from(s.as_str()).to_string(),
            Cell::Num(x) if x.is_finite() => format_f64(*x),
            Cell::Num(_) | Cell::Missing => "null".to_string(),
            other => other.csv(),
        }
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

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// A rectangular result table that renders as CSV or as a JSON array of
/// objects with keys in column order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Serialize(e.to_string());
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(wrap)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let keys: Vec<String> = self
            .header
            .iter()
            .map(|h| serde_json::Value::from(h.as_str()).to_string())
            .collect();
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (k, cell)) in keys.iter().zip(row).enumerate() {
                let sep = if j == 0 { "" } else { ", " };
                let _ = write!(out, "{sep}{k}: {}", cell.json());
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    /// Writes `<dir>/<stem>.<ext>` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat) -> Result<PathBuf> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        let text = match format {
            OutputFormat::Csv => self.to_csv()?,
            OutputFormat::Json => self.to_json(),
        };
        write_text(&path, &text)?;
        Ok(path)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            create_dir(parent)?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// Summary of one CLI invocation, printed to stderr. Kept out of output
/// files because it carries wall-clock time.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: serde_json::Value,
    /// Warning counts by kind.
    pub warning_counts: std::collections::BTreeMap<String, usize>,
    pub warnings: Vec<IngestWarning>,
    pub outputs: Vec<PathBuf>,
    pub elapsed_ms: u128,
}

impl RunReport {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        warnings: Vec<IngestWarning>,
        outputs: Vec<PathBuf>,
        elapsed: std::time::Duration,
    ) -> Self {
        let mut warning_counts = std::collections::BTreeMap::new();
        for w in &warnings {
            *warning_counts.entry(w.kind().to_string()).or_insert(0) += 1;
        }
        Self {
            command: command.to_string(),
            config,
            warning_counts,
            warnings,
            outputs,
            elapsed_ms: elapsed.as_millis(),
        }
    }
}
