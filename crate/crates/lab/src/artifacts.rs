//! Result files: `result.json`, `trials.csv` and `manifest.json`, each
//! written to a temporary file in the output directory and renamed into
//! place.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::LabError;

pub const RESULT_FILE: &str = "result.json";
pub const TRIALS_FILE: &str = "trials.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ERROR_FILE: &str = "error.json";

/// What an experiment produced, before it touches the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub result: Value,
    pub csv: Vec<u8>,
}

/// Floats in CSV cells: 17 significant digits.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or a string tag for non-finite values (which JSON lacks).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(cell(x))
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// CSV table accumulated in memory.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Self, LabError> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, cells: I) -> Result<(), LabError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.writer.write_record(cells)?)
    }

    pub fn finish(self) -> Result<Vec<u8>, LabError> {
        self.writer.into_inner().map_err(|e| LabError::Io(e.into_error()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), LabError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| LabError::Io(e.error))?;
    Ok(())
}

pub fn pretty(value: &Value) -> Result<Vec<u8>, LabError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Run metadata that goes into the manifest alongside the file hashes.
#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub experiment: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub status: &'static str,
}

/// Writes `files` and then the manifest listing them.
pub fn write_run(dir: &Path, files: &[(&str, Vec<u8>)], info: &RunInfo, wall: Duration) -> Result<Vec<FileEntry>, LabError> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        write_atomic(dir, name, bytes)?;
        entries.push(FileEntry { name: (*name).into(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "schema_version": crate::config::SCHEMA_VERSION,
        "run": info,
        "files": entries,
        "wall_time_seconds": wall.as_secs_f64(),
    });
    write_atomic(dir, MANIFEST_FILE, &pretty(&manifest)?)?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_carry_seventeen_digits() {
        assert_eq!(cell(0.1), "1.0000000000000001e-1");
        assert_eq!(cell(f64::INFINITY), "inf");
        assert_eq!(cell(-0.5).parse::<f64>().unwrap(), -0.5);
        let x = std::f64::consts::LN_2;
        assert_eq!(cell(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let info = RunInfo { experiment: "rho".into(), config_sha256: sha256_hex(b""), seed: None, trials: None, status: "ok" };
        let entries = write_run(dir.path(), &[("a.txt", b"abc".to_vec())], &info, Duration::ZERO).unwrap();
        assert_eq!(entries[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let m: Value = serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(m["files"][0]["name"], "a.txt");
        assert_eq!(fs::read(dir.path().join("a.txt")).unwrap(), b"abc");
    }
}
