//! Atomic result files and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary file in the same
/// directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("results serialize");
    v.push(b'\n');
    v
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(CliError::MissingResults(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_slice(&bytes).map_err(|source| CliError::Json { path: path.into(), source })
}

#[derive(Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: Option<u64>,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Collects outputs of one command and writes them with a manifest.
pub struct RunWriter {
    out: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<FileDigest>,
}

impl RunWriter {
    pub fn new(out: PathBuf) -> Self {
        RunWriter { out, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.out.join(name), bytes)?;
        self.outputs.push(FileDigest { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &to_json(value))
    }

    /// Writes `<command>.manifest.json`.
    pub fn finish<C: Serialize>(self, command: &str, seed: Option<u64>, config: &C) -> Result<()> {
        let config = serde_json::to_value(config).expect("config serializes");
        let config_sha256 = sha256_hex(&serde_json::to_vec(&config).expect("config serializes"));
        let mut inputs = Vec::new();
        for p in &self.inputs {
            let bytes = std::fs::read(p).map_err(|source| CliError::Io { path: p.clone(), source })?;
            // artifacts of earlier commands are named relative to the output directory
            let shown = p.strip_prefix(&self.out).unwrap_or(p);
            inputs.push(FileDigest { path: shown.display().to_string(), sha256: sha256_hex(&bytes) });
        }
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config_sha256,
            config,
            inputs,
            outputs: self.outputs,
        };
        write_atomic(&self.out.join(format!("{command}.manifest.json")), &to_json(&manifest))
    }
}
