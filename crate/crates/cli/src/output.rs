use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::Format;
use crate::error::{CliError, CliResult};

fn write_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("cannot write {}: {e}", path.display()))
}

pub fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| write_err(dir, e))
        }
        _ => Ok(()),
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| write_err(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| write_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| write_err(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| write_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| write_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}

/// Dense matrix as delimited text, one row per line, no header.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<()> {
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| write_err(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..m.nrows() {
        let line: Vec<String> = m.row(i).iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}

/// Prints the table or the JSON document to stdout.
pub fn emit(format: Format, table: &str, json: &serde_json::Value) {
    match format {
        Format::Table => print!("{table}"),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(json).expect("JSON values serialize")
        ),
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}
