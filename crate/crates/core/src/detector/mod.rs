//! Desk-scale detector: fixed spectral/residual feature extraction plus
//! a small fully-connected network with hand-derived gradients, trained
//! with BCE under SGD-with-momentum wrapped by a SAM two-step.

mod features;
mod model;
mod train;

pub use features::{extract_features, FeatureVector, FEATURE_LEN};
pub use model::{
    bce_loss, DetectorModel, GradientBuffer, MomentumState, LAYER_SIZES, MODEL_MAGIC,
    MODEL_VERSION,
};
pub use train::{predict_score, sam_step, sgd_momentum_step, train, Sample, Stage, TrainConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad model file: {0}")]
    BadModel(String),
    #[error("training set must contain both labels")]
    SingleClass,
}
