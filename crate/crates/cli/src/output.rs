//! Output files. Every CSV row and JSON document carries the config hash and
//! the tolerances in force, so a table can always be traced to its run.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::Failure;

/// Shortest round-trip decimal, in exponent form for very small or large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct Output {
    dir: PathBuf,
    hash: String,
}

impl Output {
    pub fn new(dir: &Path, hash: String) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `rows` under `header`, appending `config_hash` and `tolerances` columns.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>], tolerances: &str) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        let mut full: Vec<&str> = header.to_vec();
        full.extend(["config_hash", "tolerances"]);
        w.write_record(&full).map_err(io)?;
        for row in rows {
            let mut record = row.clone();
            record.push(self.hash.clone());
            record.push(tolerances.to_string());
            w.write_record(&record).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// Writes `body` with `config_hash` and `tolerances` merged in at the top level.
    pub fn json(&self, name: &str, body: Value, tolerances: &str) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        let mut doc = json!({ "config_hash": self.hash, "tolerances": tolerances });
        if let (Value::Object(target), Value::Object(extra)) = (&mut doc, body) {
            target.extend(extra);
        }
        let text = serde_json::to_string_pretty(&doc).expect("JSON value serializes");
        fs::write(&path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, 1.0, -0.5, 1e-3, 2.061e-9, 1e300, 123456.789, -7.25e-17] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.001), "0.001");
        assert_eq!(num(2.5e-9), "2.5e-9");
    }
}
