//! CSV and JSON writers. Floats carry 17 significant digits; every file
//! embeds the resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Scientific notation with 17 significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| float(*x)).collect());
    }
}

pub struct Writer {
    dir: PathBuf,
    echo: String,
}

impl Writer {
    pub fn new(dir: &Path, config: &impl Serialize) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let echo = serde_json::to_string(config).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Writer { dir: dir.to_path_buf(), echo })
    }

    /// CSV preceded by one `# config: {...}` comment line.
    pub fn csv(&self, name: &str, table: &Table) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
        let mut buf = format!("# config: {}\n", self.echo).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&table.header).map_err(|e| io(&e))?;
            for r in &table.rows {
                w.write_record(r).map_err(|e| io(&e))?;
            }
            w.flush().map_err(|e| io(&e))?;
        }
        fs::write(&path, buf).map_err(|e| io(&e))?;
        Ok(path)
    }

    /// Pretty JSON object `{"config": ..., "report": ...}`.
    pub fn json(&self, name: &str, report: &impl Serialize) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let config: serde_json::Value = serde_json::from_str(&self.echo).map_err(|e| CliError::Io(e.to_string()))?;
        let doc = serde_json::json!({ "config": config, "report": report });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(-2.5), "-2.5000000000000000e0");
        assert_eq!(float(f64::INFINITY), "inf");
        let s = float(std::f64::consts::PI);
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }
}
