use std::io::Write;
use std::path::Path;

use selfmad_core::detector::Stage;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One synthesized sample. `path` is relative to the manifest's parent
/// directory so reruns in different locations compare byte-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub path: String,
    pub label: u8,
    pub stage: Stage,
    pub source: String,
    pub seed_path: String,
    pub param_digest: String,
    pub split: String,
    pub config_digest: String,
}

impl ManifestRecord {
    /// Stage↔label consistency: OS/AS are 0, MS/FMS are 1.
    pub fn validate(&self) -> Result<(), CliError> {
        if f64::from(self.label) != self.stage.label() {
            return Err(CliError::Data(format!(
                "record {}: stage {} inconsistent with label {}",
                self.path,
                self.stage.tag(),
                self.label
            )));
        }
        if self.split != "train" && self.split != "test" {
            return Err(CliError::Data(format!(
                "record {}: unknown split {:?}",
                self.path, self.split
            )));
        }
        Ok(())
    }
}

/// Write records as JSONL with fixed field order; deterministic bytes.
pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    for r in records {
        r.validate()?;
        let line = serde_json::to_string(r)
            .map_err(|e| CliError::Data(format!("manifest encode: {e}")))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

/// Read and re-validate a manifest.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: ManifestRecord = serde_json::from_str(line)
            .map_err(|e| CliError::Data(format!("manifest line {}: {e}", i + 1)))?;
        r.validate()?;
        out.push(r);
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("empty manifest {}", path.display())));
    }
    Ok(out)
}
