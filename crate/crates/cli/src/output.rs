//! Atomic artifact writes and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ia_core::config::RunConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::Report;

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub master_seed: u64,
    pub config: &'a RunConfig,
    pub artifacts: Vec<ArtifactRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in `dir` and renames it into place.
pub fn write_atomic(dir: &Path, file_name: &str, contents: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let target = dir.join(file_name);
    let mut tmp = tempfile::Builder::new()
        .prefix(&format!(".{file_name}."))
        .tempfile_in(dir)
        .with_context(|| format!("temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target)
        .with_context(|| format!("renaming into {}", target.display()))?;
    Ok(target)
}

pub fn manifest_name(command: &str) -> String {
    format!("{command}.manifest.json")
}

/// Writes every artifact of `report`, then the manifest. Returns the paths
/// written, manifest last.
pub fn write_report(report: &Report, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    let mut paths = Vec::new();
    let mut records = Vec::new();
    for a in &report.artifacts {
        paths.push(write_atomic(dir, &a.file_name, &a.contents)?);
        records.push(ArtifactRecord {
            file: a.file_name.clone(),
            bytes: a.contents.len(),
            sha256: sha256_hex(&a.contents),
        });
    }
    let manifest = Manifest {
        tool: "mmw-ia",
        version: env!("CARGO_PKG_VERSION"),
        command: report.command,
        master_seed: cfg.sim.master_seed,
        config: cfg,
        artifacts: records,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    paths.push(write_atomic(dir, &manifest_name(report.command), &json)?);
    Ok(paths)
}
