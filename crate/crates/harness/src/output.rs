//! Output directory handling: CSV/JSON writers with provenance sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::HarnessError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    v.to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// What produced a set of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub seeds: serde_json::Value,
    pub inputs: Vec<InputHash>,
}

impl Provenance {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        seeds: serde_json::Value,
        inputs: &[&Path],
    ) -> Result<Self, HarnessError> {
        let config = serde_json::to_value(config)?;
        let config_sha256 = sha256_hex(&serde_json::to_vec(&config)?);
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputHash { path: p.display().to_string(), sha256: sha256_hex(&fs::read(p)?) })
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        Ok(Provenance { command: command.to_string(), version: env!("CARGO_PKG_VERSION"), config, config_sha256, seeds, inputs })
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    file: &'a str,
    sha256: String,
    #[serde(flatten)]
    provenance: &'a Provenance,
}

/// A directory of outputs that all share one provenance record.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>, provenance: Provenance) -> Result<Self, HarnessError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(OutputDir { dir, provenance, written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        let sidecar = Sidecar { file: name, sha256: sha256_hex(bytes), provenance: &self.provenance };
        let mut json = serde_json::to_vec_pretty(&sidecar)?;
        json.push(b'\n');
        fs::write(self.dir.join(format!("{name}.provenance.json")), json)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, HarnessError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf, HarnessError> {
        let mut json = serde_json::to_vec_pretty(value)?;
        json.push(b'\n');
        self.write_bytes(name, &json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn every_file_gets_a_sidecar() {
        let tmp = tempfile::tempdir().unwrap();
        let prov = Provenance::new("test", &serde_json::json!({"k": 3}), serde_json::json!({"base": 1}), &[]).unwrap();
        let mut out = OutputDir::create(tmp.path().join("o"), prov).unwrap();
        out.write_csv("t.csv", &["a", "b"], vec![vec![num(0.1), num(2.0)]]).unwrap();
        let text = fs::read_to_string(tmp.path().join("o/t.csv")).unwrap();
        assert_eq!(text, "a,b\n0.1,2\n");
        let side: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(tmp.path().join("o/t.csv.provenance.json")).unwrap()).unwrap();
        assert_eq!(side["file"], "t.csv");
        assert_eq!(side["sha256"], sha256_hex(text.as_bytes()));
        assert_eq!(side["config"]["k"], 3);
        assert_eq!(side["seeds"]["base"], 1);
    }
}
