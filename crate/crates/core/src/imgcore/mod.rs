//! Image buffers, codecs, geometric primitives and seeded randomness
//! shared by every pipeline stage.

mod buffer;
mod codec;
mod geometry;
mod rng;

pub use buffer::{BoundingBox, ImageBuffer};
pub use codec::{load_image, load_seg_map, save_image, save_pgm};
pub use geometry::{
    crop_window, crop_with_margin, gaussian_blur, resize_bilinear, round_half_up, warp_bilinear,
};
pub use rng::{RngStream, StreamLabel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported or malformed image format: {0}")]
    Format(String),
    #[error("invalid dimensions: {0}")]
    Dims(String),
    #[error("bounding box outside image: {0}")]
    BoxOutOfBounds(String),
}
