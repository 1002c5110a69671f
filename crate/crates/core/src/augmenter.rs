//! Global appearance augmentations that keep an image bona fide: RGB
//! shift, HSV shift, brightness/contrast, and one of downscale or
//! sharpen.

use serde::{Deserialize, Serialize};

use crate::imgcore::{gaussian_blur, resize_bilinear, ImageBuffer, RngStream};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentConfig {
    /// Max per-channel additive RGB offset.
    pub rgb_shift_max: f64,
    /// Max hue offset in degrees.
    pub hue_shift_max: f64,
    pub sat_shift_max: f64,
    pub val_shift_max: f64,
    pub brightness_max: f64,
    pub contrast_max: f64,
    pub downscale_factors: Vec<u32>,
    pub sharpen_strength_range: [f64; 2],
    pub sharpen_sigma: f64,
    /// Application probability for each of the first three transforms.
    pub apply_probability: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            rgb_shift_max: 20.0 / 255.0,
            hue_shift_max: 10.0,
            sat_shift_max: 0.1,
            val_shift_max: 0.1,
            brightness_max: 0.1,
            contrast_max: 0.1,
            downscale_factors: vec![2, 4],
            sharpen_strength_range: [0.2, 0.5],
            sharpen_sigma: 1.0,
            apply_probability: 1.0,
        }
    }
}

/// Per-channel additive shift, clamped to [0,1].
pub fn rgb_shift(img: &ImageBuffer, offsets: [f64; 3]) -> ImageBuffer {
    assert_eq!(img.channels(), 3);
    let mut out = img.clone();
    let ch = img.channels();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v = (*v as f64 + offsets[i % ch]).clamp(0.0, 1.0) as f32;
    }
    out
}

/// RGB -> HSV (hue in degrees, s/v in [0,1]). Hue at zero saturation is 0.
fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (((g - b) / delta).rem_euclid(6.0))
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    (h, s, max)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h = h.rem_euclid(360.0);
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    (r1 + m, g1 + m, b1 + m)
}

/// HSV-domain shift: hue wraps mod 360, saturation and value clamp.
pub fn hue_saturation_value(img: &ImageBuffer, dh: f64, ds: f64, dv: f64) -> ImageBuffer {
    assert_eq!(img.channels(), 3);
    let mut out = ImageBuffer::new(img.height(), img.width(), 3);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (h, s, v) = rgb_to_hsv(
                img.get(y, x, 0) as f64,
                img.get(y, x, 1) as f64,
                img.get(y, x, 2) as f64,
            );
            let (r, g, b) = hsv_to_rgb(
                (h + dh).rem_euclid(360.0),
                (s + ds).clamp(0.0, 1.0),
                (v + dv).clamp(0.0, 1.0),
            );
            out.set(y, x, 0, r.clamp(0.0, 1.0) as f32);
            out.set(y, x, 1, g.clamp(0.0, 1.0) as f32);
            out.set(y, x, 2, b.clamp(0.0, 1.0) as f32);
        }
    }
    out
}

/// v' = clamp((v - 0.5)·(1+dc) + 0.5 + db)
pub fn brightness_contrast(img: &ImageBuffer, db: f64, dc: f64) -> ImageBuffer {
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = ((*v as f64 - 0.5) * (1.0 + dc) + 0.5 + db).clamp(0.0, 1.0) as f32;
    }
    out
}

/// Bilinear downscale by an integer factor, then upscale back to the
/// original dims. Detail is lost, dimensions are unchanged.
pub fn random_downscale(img: &ImageBuffer, factor: u32) -> ImageBuffer {
    assert!(factor >= 1);
    let dh = (img.height() / factor as usize).max(1);
    let dw = (img.width() / factor as usize).max(1);
    if dh == img.height() && dw == img.width() {
        return img.clone();
    }
    let small = resize_bilinear(img, dh, dw);
    let mut out = resize_bilinear(&small, img.height(), img.width());
    out.clamp_in_place();
    out
}

/// Unsharp mask: v' = clamp(v + strength·(v - blur(v, σ))).
pub fn sharpen(img: &ImageBuffer, strength: f64, sigma: f64) -> ImageBuffer {
    let blurred = gaussian_blur(img, sigma);
    let mut out = img.clone();
    for (v, b) in out.data_mut().iter_mut().zip(blurred.data()) {
        *v = (*v as f64 + strength * (*v as f64 - *b as f64)).clamp(0.0, 1.0) as f32;
    }
    out
}

/// Parameters drawn for one augmentation pass, kept for provenance.
#[derive(Debug, Clone)]
pub struct AugmentDraw {
    pub rgb: Option<[f64; 3]>,
    pub hsv: Option<[f64; 3]>,
    pub brightness_contrast: Option<[f64; 2]>,
    pub downscale_factor: Option<u32>,
    pub sharpen_strength: Option<f64>,
}

impl AugmentDraw {
    pub fn describe(&self) -> String {
        format!(
            "rgb={:?};hsv={:?};bc={:?};down={:?};sharp={:?}",
            self.rgb, self.hsv, self.brightness_contrast, self.downscale_factor,
            self.sharpen_strength
        )
    }
}

/// Sequentially apply the three color transforms, then exactly one of
/// downscale or sharpen, with parameters drawn from `rng`.
pub fn augment(img: &ImageBuffer, cfg: &AugmentConfig, rng: &mut RngStream) -> ImageBuffer {
    augment_traced(img, cfg, rng).0
}

pub fn augment_traced(
    img: &ImageBuffer,
    cfg: &AugmentConfig,
    rng: &mut RngStream,
) -> (ImageBuffer, AugmentDraw) {
    let mut draw = AugmentDraw {
        rgb: None,
        hsv: None,
        brightness_contrast: None,
        downscale_factor: None,
        sharpen_strength: None,
    };
    let mut out = img.clone();

    // The probability gate and parameters are drawn unconditionally so
    // the stream position never depends on earlier outcomes.
    let gate = rng.coin(cfg.apply_probability);
    let offsets = [
        rng.range(-cfg.rgb_shift_max, cfg.rgb_shift_max),
        rng.range(-cfg.rgb_shift_max, cfg.rgb_shift_max),
        rng.range(-cfg.rgb_shift_max, cfg.rgb_shift_max),
    ];
    if gate {
        out = rgb_shift(&out, offsets);
        draw.rgb = Some(offsets);
    }

    let gate = rng.coin(cfg.apply_probability);
    let dh = rng.range(-cfg.hue_shift_max, cfg.hue_shift_max);
    let ds = rng.range(-cfg.sat_shift_max, cfg.sat_shift_max);
    let dv = rng.range(-cfg.val_shift_max, cfg.val_shift_max);
    if gate {
        out = hue_saturation_value(&out, dh, ds, dv);
        draw.hsv = Some([dh, ds, dv]);
    }

    let gate = rng.coin(cfg.apply_probability);
    let db = rng.range(-cfg.brightness_max, cfg.brightness_max);
    let dc = rng.range(-cfg.contrast_max, cfg.contrast_max);
    if gate {
        out = brightness_contrast(&out, db, dc);
        draw.brightness_contrast = Some([db, dc]);
    }

    // OneOf(RandomDownScale, Sharpen), chosen uniformly.
    if rng.coin(0.5) {
        let idx = rng.below(cfg.downscale_factors.len() as u64) as usize;
        let factor = cfg.downscale_factors[idx];
        out = random_downscale(&out, factor);
        draw.downscale_factor = Some(factor);
    } else {
        let strength = rng.range(cfg.sharpen_strength_range[0], cfg.sharpen_strength_range[1]);
        out = sharpen(&out, strength, cfg.sharpen_sigma);
        draw.sharpen_strength = Some(strength);
    }

    (out, draw)
}
