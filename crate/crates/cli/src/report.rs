//! CSV emission: comment preamble, stable header, 17-digit scientific
//! floats, LF endings, atomic replace on write.

use std::io::Write;
use std::path::Path;

use fracspace::{Error, Result};

pub struct CsvReport {
    buffer: String,
    columns: Option<usize>,
}

impl CsvReport {
    pub fn new(config_hash: &str, command: &str) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&format!("# config-hash: {config_hash}\n"));
        buffer.push_str(&format!("# command: {command}\n"));
        CsvReport {
            buffer,
            columns: None,
        }
    }

    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) {
        assert!(self.columns.is_none(), "comments precede the header");
        self.buffer.push_str(&format!("# {key}: {value}\n"));
    }

    pub fn comment_float(&mut self, key: &str, value: f64) {
        self.comment(key, fmt_float(value));
    }

    pub fn header(&mut self, names: &[&str]) {
        assert!(self.columns.is_none(), "header written twice");
        self.columns = Some(names.len());
        self.buffer.push_str(&names.join(","));
        self.buffer.push('\n');
    }

    pub fn row(&mut self, cells: &[String]) {
        let expected = self.columns.expect("header precedes rows");
        assert_eq!(cells.len(), expected, "row width mismatch");
        self.buffer.push_str(&cells.join(","));
        self.buffer.push('\n');
    }

    /// Write through a sibling temp file and rename over the target.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let io_err = |stage: &str, e: std::io::Error| {
            Error::invalid("output_path", format!("{stage} {}: {e}", path.display()))
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err("create near", e))?;
        tmp.write_all(self.buffer.as_bytes())
            .map_err(|e| io_err("write", e))?;
        tmp.persist(path)
            .map_err(|e| io_err("replace", e.error))?;
        Ok(())
    }
}

/// Scientific notation with 17 significant digits: round-trip exact for f64.
pub fn fmt_float(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn fmt_int(value: usize) -> String {
    value.to_string()
}

pub fn fmt_bool(value: bool) -> String {
    value.to_string()
}
