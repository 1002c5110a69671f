//! Command-line pipeline: dataset synthesis, detector training, scoring
//! and metric reporting on top of `selfmad-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use config::{PipelineConfig, PreprocessingConfig};
pub use error::CliError;
pub use manifest::ManifestRecord;
