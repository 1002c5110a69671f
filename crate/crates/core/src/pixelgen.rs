//! Pixel-artifact generation: geometric warps of the augmented image,
//! binary blending masks from facial-part segmentations, and the
//! masked convex blend that produces the pixel-morphed sample.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::{gaussian_blur, warp_bilinear, ImageBuffer, RngStream};

#[derive(Debug, Error)]
pub enum PixelGenError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid segmentation map: {0}")]
    BadSegMap(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeoConfig {
    /// Max translation as a fraction of width/height.
    pub translate_max: f64,
    /// Elastic displacement scale in pixels, at the reference size.
    pub elastic_alpha_range: [f64; 2],
    /// Elastic smoothing std in pixels, at the reference size.
    pub elastic_sigma_range: [f64; 2],
    pub scale_range: [f64; 2],
    /// Mask dilation radius in pixels.
    pub dilate_radius: u32,
    /// Image size the elastic ranges are calibrated for; ranges scale
    /// proportionally when the input differs.
    pub reference_size: u32,
}

impl Default for GeoConfig {
    fn default() -> Self {
        Self {
            translate_max: 0.02,
            elastic_alpha_range: [10.0, 40.0],
            elastic_sigma_range: [8.0, 16.0],
            scale_range: [0.95, 1.05],
            dilate_radius: 2,
            reference_size: 384,
        }
    }
}

/// Binary H×W mask selecting where pixel artifacts are applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlendMask {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl BlendMask {
    pub fn full(height: usize, width: usize) -> Self {
        Self { height, width, data: vec![true; height * width] }
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Binary dilation with a Euclidean disk of the given radius.
    pub fn dilate(&self, radius: u32) -> BlendMask {
        if radius == 0 {
            return self.clone();
        }
        let r = radius as i64;
        let mut offsets = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if dy * dy + dx * dx <= r * r {
                    offsets.push((dy, dx));
                }
            }
        }
        let mut out = vec![false; self.data.len()];
        for y in 0..self.height as i64 {
            for x in 0..self.width as i64 {
                if !self.data[(y * self.width as i64 + x) as usize] {
                    continue;
                }
                for &(dy, dx) in &offsets {
                    let (ny, nx) = (y + dy, x + dx);
                    if ny >= 0 && ny < self.height as i64 && nx >= 0 && nx < self.width as i64 {
                        out[(ny * self.width as i64 + nx) as usize] = true;
                    }
                }
            }
        }
        BlendMask { height: self.height, width: self.width, data: out }
    }
}

/// Facial-part class indices (CelebAMask-HQ vocabulary, 0 = background).
#[derive(Debug, Clone)]
pub struct SegmentationMap {
    height: usize,
    width: usize,
    classes: Vec<u8>,
}

pub const SEG_NUM_CLASSES: u8 = 19;

impl SegmentationMap {
    pub fn new(height: usize, width: usize, classes: Vec<u8>) -> Result<Self, PixelGenError> {
        if classes.len() != height * width {
            return Err(PixelGenError::BadSegMap(format!(
                "class data length {} does not match {height}x{width}",
                classes.len()
            )));
        }
        if let Some(&bad) = classes.iter().find(|&&c| c >= SEG_NUM_CLASSES) {
            return Err(PixelGenError::BadSegMap(format!(
                "class index {bad} outside vocabulary 0..{}",
                SEG_NUM_CLASSES - 1
            )));
        }
        Ok(Self { height, width, classes })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Distinct non-background classes present, ascending.
    pub fn present_classes(&self) -> Vec<u8> {
        let mut seen = [false; SEG_NUM_CLASSES as usize];
        for &c in &self.classes {
            seen[c as usize] = true;
        }
        (1..SEG_NUM_CLASSES).filter(|&c| seen[c as usize]).collect()
    }

    pub fn class_at(&self, y: usize, x: usize) -> u8 {
        self.classes[y * self.width + x]
    }
}

/// Discrete blending factor: 0.5 with probability 1/2, each of
/// {0.375, 0.25, 0.125} with probability 1/6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendFactor(pub f64);

const BLEND_FACTOR_SET: [f64; 6] = [0.5, 0.5, 0.5, 0.375, 0.25, 0.125];

pub fn sample_blend_factor(rng: &mut RngStream) -> BlendFactor {
    BlendFactor(BLEND_FACTOR_SET[rng.below(6) as usize])
}

/// Continuous shift with bilinear sampling and edge replication. A
/// delta pixel moves by exactly (dx, dy) for integer shifts.
pub fn translate(img: &ImageBuffer, dx: f64, dy: f64) -> ImageBuffer {
    warp_bilinear(img, |y, x| (y as f64 - dy, x as f64 - dx))
}

/// Similarity scaling about the image center; output dims unchanged.
pub fn scale_about_center(img: &ImageBuffer, factor: f64) -> ImageBuffer {
    assert!(factor > 0.0);
    let cy = (img.height() as f64 - 1.0) / 2.0;
    let cx = (img.width() as f64 - 1.0) / 2.0;
    warp_bilinear(img, |y, x| {
        (cy + (y as f64 - cy) / factor, cx + (x as f64 - cx) / factor)
    })
}

/// Smooth random deformation: per-pixel U(-1,1) displacement fields,
/// Gaussian-smoothed with std `sigma`, scaled by `alpha`.
pub fn elastic_transform(
    img: &ImageBuffer,
    alpha: f64,
    sigma: f64,
    rng: &mut RngStream,
) -> ImageBuffer {
    let (h, w) = (img.height(), img.width());
    let mut dx = ImageBuffer::new(h, w, 1);
    for v in dx.data_mut() {
        *v = rng.range(-1.0, 1.0) as f32;
    }
    let mut dy = ImageBuffer::new(h, w, 1);
    for v in dy.data_mut() {
        *v = rng.range(-1.0, 1.0) as f32;
    }
    let dx = gaussian_blur(&dx, sigma);
    let dy = gaussian_blur(&dy, sigma);
    warp_bilinear(img, |y, x| {
        (
            y as f64 + alpha * dy.get(y, x, 0) as f64,
            x as f64 + alpha * dx.get(y, x, 0) as f64,
        )
    })
}

/// Parameters drawn for one geometric pass, kept for provenance.
#[derive(Debug, Clone)]
pub struct GeoDraw {
    pub translate: [f64; 2],
    pub elastic_alpha: f64,
    pub elastic_sigma: f64,
    pub scale: f64,
}

impl GeoDraw {
    pub fn describe(&self) -> String {
        format!(
            "t={:?};alpha={};sigma={};scale={}",
            self.translate, self.elastic_alpha, self.elastic_sigma, self.scale
        )
    }
}

/// Compose translation, elastic transform and scaling with parameters
/// drawn from `rng`.
pub fn geo_transform(img: &ImageBuffer, cfg: &GeoConfig, rng: &mut RngStream) -> ImageBuffer {
    geo_transform_traced(img, cfg, rng).0
}

pub fn geo_transform_traced(
    img: &ImageBuffer,
    cfg: &GeoConfig,
    rng: &mut RngStream,
) -> (ImageBuffer, GeoDraw) {
    let (h, w) = (img.height() as f64, img.width() as f64);
    let elastic_scale = h.min(w) / cfg.reference_size as f64;

    let dx = rng.range(-cfg.translate_max * w, cfg.translate_max * w);
    let dy = rng.range(-cfg.translate_max * h, cfg.translate_max * h);
    let alpha =
        rng.range(cfg.elastic_alpha_range[0], cfg.elastic_alpha_range[1]) * elastic_scale;
    let sigma =
        rng.range(cfg.elastic_sigma_range[0], cfg.elastic_sigma_range[1]) * elastic_scale;
    let factor = rng.range(cfg.scale_range[0], cfg.scale_range[1]);

    let mut out = translate(img, dx, dy);
    out = elastic_transform(&out, alpha, sigma, rng);
    out = scale_about_center(&out, factor);
    out.clamp_in_place();
    let draw = GeoDraw {
        translate: [dx, dy],
        elastic_alpha: alpha,
        elastic_sigma: sigma,
        scale: factor,
    };
    (out, draw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMode {
    Full,
    Parts,
}

/// Outcome of mask construction, including the fallback flag recorded
/// in sample provenance.
#[derive(Debug, Clone)]
pub struct MaskDraw {
    pub mask: BlendMask,
    pub mode_used: MaskMode,
    pub classes: Vec<u8>,
    pub fell_back_to_full: bool,
}

/// Build a blending mask. `Parts` mode takes the union of k facial-part
/// classes (k uniform in {2,3,4}, without replacement from the present
/// non-background classes) and dilates it; with fewer than two classes
/// present it falls back to the full mask.
pub fn make_mask(
    seg: Option<&SegmentationMap>,
    mode: MaskMode,
    height: usize,
    width: usize,
    cfg: &GeoConfig,
    rng: &mut RngStream,
) -> MaskDraw {
    let seg = match (mode, seg) {
        (MaskMode::Full, _) | (MaskMode::Parts, None) => {
            return MaskDraw {
                mask: BlendMask::full(height, width),
                mode_used: MaskMode::Full,
                classes: Vec::new(),
                fell_back_to_full: mode == MaskMode::Parts,
            };
        }
        (MaskMode::Parts, Some(s)) => s,
    };
    let present = seg.present_classes();
    if present.len() < 2 {
        return MaskDraw {
            mask: BlendMask::full(seg.height(), seg.width()),
            mode_used: MaskMode::Full,
            classes: Vec::new(),
            fell_back_to_full: true,
        };
    }
    let k = (2 + rng.below(3) as usize).min(present.len());
    let picked_idx = rng.sample_without_replacement(present.len(), k);
    let mut classes: Vec<u8> = picked_idx.iter().map(|&i| present[i]).collect();
    classes.sort_unstable();
    let raw = BlendMask::from_fn(seg.height(), seg.width(), |y, x| {
        classes.contains(&seg.class_at(y, x))
    });
    MaskDraw {
        mask: raw.dilate(cfg.dilate_radius),
        mode_used: MaskMode::Parts,
        classes,
        fell_back_to_full: false,
    }
}

/// Masked convex blend: inside M, a·warped + (1-a)·source; outside M the
/// source passes through unchanged.
pub fn blend(
    source: &ImageBuffer,
    warped: &ImageBuffer,
    mask: &BlendMask,
    a: BlendFactor,
) -> Result<ImageBuffer, PixelGenError> {
    if source.height() != warped.height()
        || source.width() != warped.width()
        || source.channels() != warped.channels()
        || mask.height() != source.height()
        || mask.width() != source.width()
    {
        return Err(PixelGenError::DimMismatch(format!(
            "source {}x{}x{}, warped {}x{}x{}, mask {}x{}",
            source.height(),
            source.width(),
            source.channels(),
            warped.height(),
            warped.width(),
            warped.channels(),
            mask.height(),
            mask.width()
        )));
    }
    let mut out = source.clone();
    let a = a.0;
    for y in 0..source.height() {
        for x in 0..source.width() {
            if !mask.get(y, x) {
                continue;
            }
            for c in 0..source.channels() {
                let s = source.get(y, x, c) as f64;
                let wv = warped.get(y, x, c) as f64;
                out.set(y, x, c, (a * wv + (1.0 - a) * s).clamp(0.0, 1.0) as f32);
            }
        }
    }
    Ok(out)
}
