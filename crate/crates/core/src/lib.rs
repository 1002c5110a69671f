//! Self-supervised morphing-artifact simulation and detection.
//!
//! The pipeline turns a bona fide face crop into four labeled samples:
//! the original crop, a globally augmented copy, a pixel-space morph
//! (geometric warp blended back through a binary mask) and a
//! frequency-space morph (structured pattern superimposed on the
//! magnitude spectrum). A small fully-connected detector is trained on
//! spectral/residual features of these samples and evaluated with
//! ISO/IEC 30107-3 style metrics (EER, BPCER at fixed APCER).

pub mod augmenter;
pub mod detector;
pub mod freqgen;
pub mod imgcore;
pub mod metrics;
pub mod pixelgen;

pub use imgcore::{BoundingBox, ImageBuffer, RngStream};
pub use metrics::{MetricsReport, ScoreRecord};
