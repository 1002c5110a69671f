use crate::freqgen::fft2;
use crate::imgcore::ImageBuffer;

pub const RADIAL_BINS: usize = 64;
pub const RESIDUAL_BINS: usize = 16;
pub const MOMENTS: usize = 6;
/// 64 radial log-power bins + 16 high-pass residual histogram bins +
/// mean and variance per channel.
pub const FEATURE_LEN: usize = RADIAL_BINS + RESIDUAL_BINS + MOMENTS;

pub type FeatureVector = [f64; FEATURE_LEN];

/// Deterministic 86-vector of spectral and residual statistics.
///
/// Radial bins are channel-averaged log(1+power) over equally spaced
/// normalized-radius shells, DC excluded, with power scaled by 1/(H·W)
/// so the features are dimension-invariant. The residual histogram
/// covers |img - boxblur3(img)| magnitudes over [0, 0.25).
pub fn extract_features(img: &ImageBuffer) -> FeatureVector {
    assert_eq!(img.channels(), 3, "feature extraction expects RGB input");
    let mut out = [0.0f64; FEATURE_LEN];
    let (h, w) = (img.height(), img.width());

    // Radial log-power spectrum.
    let spec = fft2(img);
    let r_max = (0.5f64.powi(2) + 0.5f64.powi(2)).sqrt();
    let mut power_sum = [0.0f64; RADIAL_BINS];
    let mut power_count = [0usize; RADIAL_BINS];
    for u in 0..h {
        for v in 0..w {
            if u == 0 && v == 0 {
                continue;
            }
            let fu = u.min(h - u) as f64 / h as f64;
            let fv = v.min(w - v) as f64 / w as f64;
            let r = (fu * fu + fv * fv).sqrt();
            let bin = ((r / r_max) * RADIAL_BINS as f64) as usize;
            let bin = bin.min(RADIAL_BINS - 1);
            let mut p = 0.0;
            for c in 0..3 {
                p += spec.get(c, u, v).norm_sqr();
            }
            power_sum[bin] += p / 3.0 / (h * w) as f64;
            power_count[bin] += 1;
        }
    }
    for b in 0..RADIAL_BINS {
        let mean = if power_count[b] > 0 {
            power_sum[b] / power_count[b] as f64
        } else {
            0.0
        };
        out[b] = mean.ln_1p();
    }

    // High-pass residual histogram: image minus 3x3 box blur.
    let mut count = [0usize; RESIDUAL_BINS];
    for y in 0..h {
        for x in 0..w {
            let mut mag = 0.0f64;
            for c in 0..3 {
                let mut acc = 0.0f64;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        acc += img.get_clamped(y as i64 + dy, x as i64 + dx, c) as f64;
                    }
                }
                mag += (img.get(y, x, c) as f64 - acc / 9.0).abs();
            }
            mag /= 3.0;
            let bin = ((mag / 0.25) * RESIDUAL_BINS as f64) as usize;
            count[bin.min(RESIDUAL_BINS - 1)] += 1;
        }
    }
    let n = (h * w) as f64;
    for b in 0..RESIDUAL_BINS {
        out[RADIAL_BINS + b] = count[b] as f64 / n;
    }

    // Per-channel mean and variance.
    for c in 0..3 {
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for y in 0..h {
            for x in 0..w {
                let v = img.get(y, x, c) as f64;
                sum += v;
                sum_sq += v * v;
            }
        }
        let mean = sum / n;
        out[RADIAL_BINS + RESIDUAL_BINS + 2 * c] = mean;
        out[RADIAL_BINS + RESIDUAL_BINS + 2 * c + 1] = (sum_sq / n - mean * mean).max(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freqgen::{inject_frequency_artifact, FreqConfig, PatternSpec};
    use crate::imgcore::RngStream;

    fn random_img(h: usize, w: usize, seed: u64) -> ImageBuffer {
        let mut r = RngStream::new(seed);
        let data = (0..h * w * 3).map(|_| r.uniform() as f32).collect();
        ImageBuffer::from_vec(h, w, 3, data).unwrap()
    }

    #[test]
    fn constant_image_features() {
        let img = ImageBuffer::constant(32, 32, 3, 0.5);
        let f = extract_features(&img);
        for b in 0..RADIAL_BINS {
            assert!(f[b].abs() < 1e-9, "radial bin {b} should be 0, got {}", f[b]);
        }
        assert!((f[RADIAL_BINS] - 1.0).abs() < 1e-12, "residual mass in bin 0");
        assert!((f[RADIAL_BINS + RESIDUAL_BINS] - 0.5).abs() < 1e-6);
        assert!(f[RADIAL_BINS + RESIDUAL_BINS + 1].abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let img = random_img(24, 24, 1);
        assert_eq!(extract_features(&img), extract_features(&img));
    }

    #[test]
    fn finite_and_fixed_length() {
        let img = random_img(17, 23, 2);
        let f = extract_features(&img);
        assert_eq!(f.len(), 86);
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn stripe_fingerprint_dominates_one_radial_bin() {
        let img = random_img(64, 64, 3);
        // Period-4 stripes alias all odd harmonics onto the same radial
        // shell at normalized frequency 0.25.
        let spec = PatternSpec::RandomStripes { angle_deg: 0.0, period: 4.0, duty: 0.5 };
        let cfg = FreqConfig { k: 0.3, ..FreqConfig::default() };
        let out = inject_frequency_artifact(&img, &spec, &cfg);

        let fa = extract_features(&img);
        let fb = extract_features(&out);
        let r_max = (0.5f64 * 0.5 + 0.5 * 0.5).sqrt();
        let stripe_bin = ((0.25 / r_max) * RADIAL_BINS as f64) as usize;
        let stripe_diff = (fb[stripe_bin] - fa[stripe_bin]).abs();
        let mut other_max = 0.0f64;
        for b in 0..RADIAL_BINS {
            if b != stripe_bin {
                other_max = other_max.max((fb[b] - fa[b]).abs());
            }
        }
        assert!(
            stripe_diff > 10.0 * other_max,
            "stripe bin diff {stripe_diff} vs other max {other_max}"
        );
    }
}
