//! Run manifest written next to every artifact.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub version: String,
    pub config: Value,
    pub seed: u64,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub results: serde_json::Map<String, Value>,
    pub wall_clock_secs: f64,
}

fn record(path: &Path) -> Result<FileRecord> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileRecord { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

impl Manifest {
    pub fn new(subcommand: &str, config: Value, seed: u64) -> Self {
        Manifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            results: serde_json::Map::new(),
            wall_clock_secs: 0.0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(record(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(record(path)?);
        Ok(())
    }

    pub fn extra(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn finish(mut self, path: &Path, start: Instant) -> Result<()> {
        self.wall_clock_secs = start.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
