use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Input path → SHA-256 (hex).
    pub inputs: BTreeMap<String, String>,
    /// Output path relative to the run directory → SHA-256 (hex).
    pub outputs: BTreeMap<String, String>,
    pub parameters: serde_json::Value,
    pub duration_s: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else if path.strip_prefix(root).ok() != Some(Path::new(MANIFEST_FILE)) {
            out.push(path);
        }
    }
    Ok(())
}

fn relative_key(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        Self {
            command: command.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            parameters,
            duration_s: 0.0,
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Digests every file under `dir` and writes the manifest there.
    pub fn seal(mut self, dir: &Path, started: Instant) -> Result<Self> {
        let mut files = Vec::new();
        collect_files(dir, dir, &mut files)?;
        self.outputs.clear();
        for f in files {
            self.outputs.insert(relative_key(dir, &f), sha256_file(&f)?);
        }
        self.duration_s = started.elapsed().as_secs_f64();
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&self)?).map_err(|e| Error::io(&path, e))?;
        Ok(self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(Error::MissingFile(path));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks output digests, and input digests for inputs that still exist.
    /// Returns the inputs that could not be found.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut problems = Vec::new();
        for (rel, digest) in &self.outputs {
            let path = dir.join(rel);
            if !path.exists() {
                problems.push(format!("output `{rel}` is missing"));
            } else if &sha256_file(&path)? != digest {
                problems.push(format!("output `{rel}` does not match its digest"));
            }
        }
        let mut missing_inputs = Vec::new();
        for (input, digest) in &self.inputs {
            let path = Path::new(input);
            if !path.exists() {
                missing_inputs.push(input.clone());
            } else if &sha256_file(path)? != digest {
                problems.push(format!("input `{input}` changed since the run"));
            }
        }
        let mut extra = Vec::new();
        collect_files(dir, dir, &mut extra)?;
        for f in extra {
            let key = relative_key(dir, &f);
            if !self.outputs.contains_key(&key) {
                problems.push(format!("`{key}` is not listed in the manifest"));
            }
        }
        if problems.is_empty() {
            Ok(missing_inputs)
        } else {
            Err(Error::Manifest(problems.join("; ")))
        }
    }
}
