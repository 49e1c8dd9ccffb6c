use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::fields::SamplerSpec;
use crate::lattice::Volume;
use crate::prober::ProbePolicy;

/// Everything a report needs to be re-run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<ProbePolicy>,
    pub seeds: Vec<u64>,
    pub volumes: Vec<Volume>,
    /// Content hash of the parsed arguments and any input files.
    pub input_hash: String,
    pub tool_version: String,
}

/// `manifest.json`: provenance plus the run's command line, cost, and the
/// list of artifacts written. The only non-reproducible file in `--out`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentManifest {
    pub command_line: Vec<String>,
    pub provenance: Provenance,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
    pub total_topplings: u64,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: &'a T,
}

/// Hash in the style of a git blob, with SHA-256: `blob <len>\0<bytes>`.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    let len: usize = parts.iter().map(|p| p.len()).sum();
    h.update(format!("blob {len}\0").as_bytes());
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Writes artifacts into the output directory, if there is one.
pub struct Output {
    dir: Option<PathBuf>,
    pub written: Vec<String>,
}

impl Output {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Output { dir: dir.map(Path::to_path_buf), written: Vec::new() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&mut self, name: &str) -> Option<PathBuf> {
        let d = self.dir.as_ref()?;
        self.written.push(name.to_string());
        Some(d.join(name))
    }

    /// `{"provenance": ..., "result": ...}`.
    pub fn report<T: Serialize>(&mut self, name: &str, prov: &Provenance, result: &T) -> Result<()> {
        self.json(name, &Report { provenance: prov, result })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if let Some(p) = self.path(name) {
            let mut s = serde_json::to_string_pretty(value)?;
            s.push('\n');
            fs::write(p, s)?;
        }
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        if let Some(p) = self.path(name) {
            let mut w = csv::Writer::from_path(p)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        if let Some(p) = self.path(name) {
            fs::write(p, data)?;
        }
        Ok(())
    }
}
