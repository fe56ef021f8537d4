//! Output directory with atomic writes and the per-run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes).with_context(|| format!("writing {}", tmp.display()))?;
        f.sync_all().ok();
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
}

/// Output directory tracking every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        write_atomic(&path, bytes)?;
        let bytes = bytes.len() as u64;
        match self.entries.iter_mut().find(|e| e.path == name) {
            Some(e) => e.bytes = bytes,
            None => self.entries.push(OutputEntry {
                path: name.to_string(),
                bytes,
            }),
        }
        Ok(path)
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Record of one command invocation, written even when the command fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub preset: Option<String>,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub status: RunStatus,
    pub error: Option<String>,
    pub outputs: Vec<OutputEntry>,
    pub metrics: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn begin(command: &str) -> Self {
        Self {
            command: command.to_string(),
            preset: None,
            config_digest: String::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: now(),
            finished: String::new(),
            status: RunStatus::Ok,
            error: None,
            outputs: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    /// Real metric; non-finite values are stored as strings.
    pub fn metric_f64(&mut self, key: &str, value: f64) {
        let v = serde_json::Number::from_f64(value)
            .map(serde_json::Value::Number)
            .unwrap_or_else(|| serde_json::Value::String(value.to_string()));
        self.metrics.insert(key.to_string(), v);
    }

    /// Completes the manifest and writes it into `dir`.
    pub fn finish(mut self, dir: &Path, outputs: &[OutputEntry], error: Option<String>) -> Result<PathBuf> {
        self.finished = now();
        self.status = if error.is_some() { RunStatus::Failed } else { RunStatus::Ok };
        self.error = error;
        self.outputs = outputs.to_vec();
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("a/b")).unwrap();
        out.write("x.csv", b"1\n").unwrap();
        out.write("x.csv", b"22\n").unwrap();
        out.write("sub/y.txt", b"y").unwrap();
        assert_eq!(fs::read(out.path("x.csv")).unwrap(), b"22\n");
        assert_eq!(out.entries().len(), 2);
        assert_eq!(out.entries()[0].bytes, 3);
        let names: Vec<_> = fs::read_dir(out.root())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert!(names.iter().all(|n| !n.ends_with(".tmp")), "{names:?}");
    }

    #[test]
    fn manifest_records_failure() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::begin("simulate");
        m.metric_f64("final", f64::NAN);
        m.metric("steps", 3);
        let p = m.finish(dir.path(), &[], Some("boom".into())).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&fs::read(p).unwrap()).unwrap();
        assert_eq!(v["status"], "failed");
        assert_eq!(v["error"], "boom");
        assert_eq!(v["metrics"]["final"], "NaN");
        assert_eq!(v["metrics"]["steps"], 3);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
