use std::path::Path;

use selfmad_core::augmenter::AugmentConfig;
use selfmad_core::detector::TrainConfig;
use selfmad_core::freqgen::FreqConfig;
use selfmad_core::pixelgen::GeoConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessingConfig {
    /// Training-split crop margin is drawn uniformly from this range.
    pub train_margin_range: [f64; 2],
    /// Held-out split uses this fixed margin.
    pub test_margin: f64,
    pub target_size: usize,
}

impl Default for PreprocessingConfig {
    fn default() -> Self {
        Self {
            train_margin_range: [0.04, 0.20],
            test_margin: 0.125,
            target_size: 384,
        }
    }
}

/// Whole-pipeline configuration; every field has a default and unknown
/// JSON keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub preprocessing: PreprocessingConfig,
    pub augmenter: AugmentConfig,
    pub pixelgen: GeoConfig,
    pub freqgen: FreqConfig,
    pub detector: TrainConfig,
}

impl PipelineConfig {
    /// Load from a JSON file, or fall back to defaults when no path is
    /// given. A `--seed` flag overrides the file value.
    pub fn load(path: Option<&Path>, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Data(format!("bad config {}: {e}", p.display())))?
            }
            None => Self::default(),
        };
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        if config.preprocessing.train_margin_range[0] > config.preprocessing.train_margin_range[1]
        {
            return Err(CliError::Data("train_margin_range must be ordered".into()));
        }
        Ok(config)
    }

    /// Hex SHA-256 of the canonical JSON rendering; embedded in every
    /// manifest record and report for provenance.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}
