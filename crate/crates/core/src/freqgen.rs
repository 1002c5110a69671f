//! Frequency-artifact generation: structured binary patterns, 2-D FFT,
//! magnitude superposition with phase preservation, and inverse
//! transform back to the pixel domain.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::imgcore::{ImageBuffer, RngStream};

/// Complex H×W frequency representation, one plane per image channel.
#[derive(Debug, Clone)]
pub struct SpectrumBuffer {
    height: usize,
    width: usize,
    planes: Vec<Vec<Complex<f64>>>,
}

impl SpectrumBuffer {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, c: usize) -> &[Complex<f64>] {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [Complex<f64>] {
        &mut self.planes[c]
    }

    #[inline]
    pub fn get(&self, c: usize, u: usize, v: usize) -> Complex<f64> {
        self.planes[c][u * self.width + v]
    }

    pub fn magnitude(&self, c: usize) -> Vec<f64> {
        self.planes[c].iter().map(|z| z.norm()).collect()
    }

    pub fn phase(&self, c: usize) -> Vec<f64> {
        self.planes[c].iter().map(|z| z.arg()).collect()
    }
}

/// Unnormalized forward DFT per channel; the DC bin equals the pixel sum.
pub fn fft2(img: &ImageBuffer) -> SpectrumBuffer {
    let (h, w) = (img.height(), img.width());
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(w);
    let col_fft = planner.plan_fft_forward(h);
    let mut planes = Vec::with_capacity(img.channels());
    for c in 0..img.channels() {
        let mut plane: Vec<Complex<f64>> = (0..h * w)
            .map(|i| Complex::new(img.data()[i * img.channels() + c] as f64, 0.0))
            .collect();
        for row in plane.chunks_exact_mut(w) {
            row_fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); h];
        for v in 0..w {
            for u in 0..h {
                col[u] = plane[u * w + v];
            }
            col_fft.process(&mut col);
            for u in 0..h {
                plane[u * w + v] = col[u];
            }
        }
        planes.push(plane);
    }
    SpectrumBuffer { height: h, width: w, planes }
}

/// Inverse DFT scaled by 1/(H·W); real parts only, clamped to [0,1].
pub fn ifft2(spec: &SpectrumBuffer) -> ImageBuffer {
    let mut out = ifft2_unclamped(spec);
    out.clamp_in_place();
    out
}

/// Inverse DFT without the final clamp, for inspection of reconstruction
/// residuals before range enforcement.
pub fn ifft2_unclamped(spec: &SpectrumBuffer) -> ImageBuffer {
    let (h, w) = (spec.height, spec.width);
    let scale = 1.0 / (h * w) as f64;
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_inverse(w);
    let col_fft = planner.plan_fft_inverse(h);
    let channels = spec.channels();
    let mut out = ImageBuffer::new(h, w, channels);
    for c in 0..channels {
        let mut plane = spec.planes[c].clone();
        for row in plane.chunks_exact_mut(w) {
            row_fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); h];
        for v in 0..w {
            for u in 0..h {
                col[u] = plane[u * w + v];
            }
            col_fft.process(&mut col);
            for u in 0..h {
                plane[u * w + v] = col[u];
            }
        }
        for i in 0..h * w {
            out.data_mut()[i * channels + c] = (plane[i].re * scale) as f32;
        }
    }
    out
}

/// Max absolute imaginary residual of the inverse transform, used to
/// check that manipulated spectra stay conjugate-symmetric.
pub fn ifft2_max_imag(spec: &SpectrumBuffer) -> f64 {
    let (h, w) = (spec.height, spec.width);
    let scale = 1.0 / (h * w) as f64;
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_inverse(w);
    let col_fft = planner.plan_fft_inverse(h);
    let mut worst = 0.0f64;
    for c in 0..spec.channels() {
        let mut plane = spec.planes[c].clone();
        for row in plane.chunks_exact_mut(w) {
            row_fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); h];
        for v in 0..w {
            for u in 0..h {
                col[u] = plane[u * w + v];
            }
            col_fft.process(&mut col);
            for u in 0..h {
                plane[u * w + v] = col[u];
            }
        }
        for z in &plane {
            worst = worst.max((z.im * scale).abs());
        }
    }
    worst
}

/// The seven structured pattern families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    SymmetricGrid,
    AsymmetricGrid,
    SquareCheckerboard,
    CircularCheckerboard,
    RandomSquares,
    RandomLines,
    RandomStripes,
}

pub const ALL_PATTERN_KINDS: [PatternKind; 7] = [
    PatternKind::SymmetricGrid,
    PatternKind::AsymmetricGrid,
    PatternKind::SquareCheckerboard,
    PatternKind::CircularCheckerboard,
    PatternKind::RandomSquares,
    PatternKind::RandomLines,
    PatternKind::RandomStripes,
];

/// Fully resolved pattern parameters (binary foreground 1, background 0).
#[derive(Debug, Clone, PartialEq)]
pub enum PatternSpec {
    /// 1-px lines every `period` pixels, both axes.
    SymmetricGrid { period: u32 },
    /// 1-px lines with distinct horizontal/vertical periods.
    AsymmetricGrid { period_x: u32, period_y: u32 },
    SquareCheckerboard { cell: u32 },
    /// Concentric rings of the given width about the image center.
    CircularCheckerboard { ring_width: u32 },
    RandomSquares { count: u32, side: u32, seed_positions: Vec<(u32, u32)> },
    /// 1-px segments between random border point pairs.
    RandomLines { endpoints: Vec<((u32, u32), (u32, u32))> },
    /// Parallel stripes: angle in degrees, period in px, duty in (0,1).
    RandomStripes { angle_deg: f64, period: f64, duty: f64 },
}

/// Sampling ranges for pattern parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatternRanges {
    pub period: [u32; 2],
    pub cell: [u32; 2],
    pub ring_width: [u32; 2],
    pub square_count: [u32; 2],
    pub square_side: [u32; 2],
    pub line_count: [u32; 2],
    pub stripe_duty: [f64; 2],
}

impl Default for PatternRanges {
    fn default() -> Self {
        Self {
            period: [8, 32],
            cell: [8, 32],
            ring_width: [6, 24],
            square_count: [5, 20],
            square_side: [4, 16],
            line_count: [5, 20],
            stripe_duty: [0.2, 0.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeNormalization {
    MeanMatch,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreqConfig {
    /// Superposition constant of the magnitude mix, in [0,1].
    pub k: f64,
    pub dc_preserve: bool,
    pub magnitude_normalization: MagnitudeNormalization,
    pub pattern_ranges: PatternRanges,
}

impl Default for FreqConfig {
    fn default() -> Self {
        Self {
            k: 0.1,
            dc_preserve: true,
            magnitude_normalization: MagnitudeNormalization::MeanMatch,
            pattern_ranges: PatternRanges::default(),
        }
    }
}

/// Draw a fully resolved pattern spec of the given kind.
pub fn sample_pattern_spec(
    kind: PatternKind,
    h: usize,
    w: usize,
    ranges: &PatternRanges,
    rng: &mut RngStream,
) -> PatternSpec {
    let int_in = |rng: &mut RngStream, r: [u32; 2]| rng.int_range(r[0] as u64, r[1] as u64) as u32;
    match kind {
        PatternKind::SymmetricGrid => PatternSpec::SymmetricGrid {
            period: int_in(rng, ranges.period),
        },
        PatternKind::AsymmetricGrid => {
            let px = int_in(rng, ranges.period);
            let py = int_in(rng, ranges.period);
            PatternSpec::AsymmetricGrid { period_x: px, period_y: py }
        }
        PatternKind::SquareCheckerboard => PatternSpec::SquareCheckerboard {
            cell: int_in(rng, ranges.cell),
        },
        PatternKind::CircularCheckerboard => PatternSpec::CircularCheckerboard {
            ring_width: int_in(rng, ranges.ring_width),
        },
        PatternKind::RandomSquares => {
            let count = int_in(rng, ranges.square_count);
            let side = int_in(rng, ranges.square_side);
            let positions = (0..count)
                .map(|_| {
                    (
                        rng.below(w.max(1) as u64) as u32,
                        rng.below(h.max(1) as u64) as u32,
                    )
                })
                .collect();
            PatternSpec::RandomSquares { count, side, seed_positions: positions }
        }
        PatternKind::RandomLines => {
            let count = int_in(rng, ranges.line_count);
            let endpoints = (0..count)
                .map(|_| {
                    (
                        (rng.below(w as u64) as u32, rng.below(h as u64) as u32),
                        (rng.below(w as u64) as u32, rng.below(h as u64) as u32),
                    )
                })
                .collect();
            PatternSpec::RandomLines { endpoints }
        }
        PatternKind::RandomStripes => PatternSpec::RandomStripes {
            angle_deg: rng.range(0.0, 180.0),
            period: int_in(rng, ranges.period) as f64,
            duty: rng.range(ranges.stripe_duty[0], ranges.stripe_duty[1]),
        },
    }
}

/// Rasterize a binary pattern as a single-channel image.
pub fn gen_pattern(spec: &PatternSpec, h: usize, w: usize) -> ImageBuffer {
    assert!(h >= 8 && w >= 8, "pattern dims must be >= 8");
    let mut out = ImageBuffer::new(h, w, 1);
    match spec {
        PatternSpec::SymmetricGrid { period } => {
            let p = (*period).max(1) as usize;
            for y in 0..h {
                for x in 0..w {
                    if y % p == 0 || x % p == 0 {
                        out.set(y, x, 0, 1.0);
                    }
                }
            }
        }
        PatternSpec::AsymmetricGrid { period_x, period_y } => {
            let px = (*period_x).max(1) as usize;
            let py = (*period_y).max(1) as usize;
            for y in 0..h {
                for x in 0..w {
                    if y % py == 0 || x % px == 0 {
                        out.set(y, x, 0, 1.0);
                    }
                }
            }
        }
        PatternSpec::SquareCheckerboard { cell } => {
            let c = (*cell).max(1) as usize;
            for y in 0..h {
                for x in 0..w {
                    if (y / c + x / c) % 2 == 0 {
                        out.set(y, x, 0, 1.0);
                    }
                }
            }
        }
        PatternSpec::CircularCheckerboard { ring_width } => {
            let rw = (*ring_width).max(1) as f64;
            let cy = (h as f64 - 1.0) / 2.0;
            let cx = (w as f64 - 1.0) / 2.0;
            for y in 0..h {
                for x in 0..w {
                    let r = ((y as f64 - cy).powi(2) + (x as f64 - cx).powi(2)).sqrt();
                    if ((r / rw).floor() as u64) % 2 == 0 {
                        out.set(y, x, 0, 1.0);
                    }
                }
            }
        }
        PatternSpec::RandomSquares { side, seed_positions, .. } => {
            let s = (*side).max(1) as usize;
            for &(x0, y0) in seed_positions {
                for y in y0 as usize..(y0 as usize + s).min(h) {
                    for x in x0 as usize..(x0 as usize + s).min(w) {
                        out.set(y, x, 0, 1.0);
                    }
                }
            }
        }
        PatternSpec::RandomLines { endpoints } => {
            for &((x0, y0), (x1, y1)) in endpoints {
                draw_line(&mut out, x0 as i64, y0 as i64, x1 as i64, y1 as i64);
            }
        }
        PatternSpec::RandomStripes { angle_deg, period, duty } => {
            let theta = angle_deg.to_radians();
            let (ct, st) = (theta.cos(), theta.sin());
            let p = period.max(1.0);
            for y in 0..h {
                for x in 0..w {
                    let t = (x as f64 * ct + y as f64 * st).rem_euclid(p);
                    if t < duty * p {
                        out.set(y, x, 0, 1.0);
                    }
                }
            }
        }
    }
    out
}

fn draw_line(img: &mut ImageBuffer, mut x0: i64, mut y0: i64, x1: i64, y1: i64) {
    // Bresenham
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if y0 >= 0 && (y0 as usize) < img.height() && x0 >= 0 && (x0 as usize) < img.width() {
            img.set(y0 as usize, x0 as usize, 0, 1.0);
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Pattern draw record kept for provenance.
#[derive(Debug, Clone)]
pub struct FreqDraw {
    pub kind: PatternKind,
    pub spec: PatternSpec,
}

impl FreqDraw {
    pub fn describe(&self) -> String {
        format!("{:?}", self.spec)
    }
}

/// Superimpose the pattern's magnitude spectrum on the image's, keeping
/// the image's phase, and transform back to pixel space.
pub fn inject_frequency_artifact(
    img: &ImageBuffer,
    spec: &PatternSpec,
    cfg: &FreqConfig,
) -> ImageBuffer {
    let mut out = inject_frequency_artifact_unclamped(img, spec, cfg);
    out.clamp_in_place();
    out
}

/// As [`inject_frequency_artifact`] but without the final clamp.
pub fn inject_frequency_artifact_unclamped(
    img: &ImageBuffer,
    spec: &PatternSpec,
    cfg: &FreqConfig,
) -> ImageBuffer {
    let (h, w) = (img.height(), img.width());
    let pattern = gen_pattern(spec, h, w);
    let pat_spec = fft2(&pattern);
    let pat_mag: Vec<f64> = pat_spec.plane(0).iter().map(|z| z.norm()).collect();
    let pat_mean = non_dc_mean(&pat_mag, w);

    let mut img_spec = fft2(img);
    let k = cfg.k;
    for c in 0..img_spec.channels() {
        let plane = &mut img_spec.planes[c];
        let img_mag: Vec<f64> = plane.iter().map(|z| z.norm()).collect();
        let scale = match cfg.magnitude_normalization {
            MagnitudeNormalization::MeanMatch if pat_mean > 0.0 => {
                non_dc_mean(&img_mag, w) / pat_mean
            }
            _ => 1.0,
        };
        let dc_mag = img_mag[0];
        for (i, z) in plane.iter_mut().enumerate() {
            let new_mag = (1.0 - k) * img_mag[i] + k * scale * pat_mag[i];
            // Keep the original phase; zero-magnitude bins take phase 0.
            let unit = if img_mag[i] > 0.0 {
                *z / img_mag[i]
            } else {
                Complex::new(1.0, 0.0)
            };
            *z = unit * new_mag;
        }
        if cfg.dc_preserve {
            let unit = if plane[0].norm() > 0.0 {
                plane[0] / plane[0].norm()
            } else {
                Complex::new(1.0, 0.0)
            };
            plane[0] = unit * dc_mag;
        }
    }
    ifft2_unclamped(&img_spec)
}

fn non_dc_mean(mag: &[f64], _w: usize) -> f64 {
    if mag.len() <= 1 {
        return 0.0;
    }
    mag[1..].iter().sum::<f64>() / (mag.len() - 1) as f64
}

/// Pick a pattern kind uniformly and resolve its parameters.
pub fn sample_pattern(
    h: usize,
    w: usize,
    ranges: &PatternRanges,
    rng: &mut RngStream,
) -> FreqDraw {
    let kind = ALL_PATTERN_KINDS[rng.below(7) as usize];
    let spec = sample_pattern_spec(kind, h, w, ranges, rng);
    FreqDraw { kind, spec }
}

/// Mean power |S|²/(H·W) in a radial band of normalized frequency
/// [lo, hi), DC excluded. Used by fingerprint-strength tests and the
/// inspect command.
pub fn radial_band_energy(img: &ImageBuffer, lo: f64, hi: f64) -> f64 {
    let spec = fft2(img);
    let (h, w) = (spec.height(), spec.width());
    let mut acc = 0.0f64;
    let mut count = 0usize;
    for c in 0..spec.channels() {
        for u in 0..h {
            for v in 0..w {
                if u == 0 && v == 0 {
                    continue;
                }
                let fu = (u.min(h - u)) as f64 / h as f64;
                let fv = (v.min(w - v)) as f64 / w as f64;
                let r = (fu * fu + fv * fv).sqrt();
                if r >= lo && r < hi {
                    acc += spec.get(c, u, v).norm_sqr() / (h * w) as f64;
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        acc / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_img(h: usize, w: usize, ch: usize, seed: u64) -> ImageBuffer {
        let mut r = RngStream::new(seed);
        let data = (0..h * w * ch).map(|_| r.uniform() as f32).collect();
        ImageBuffer::from_vec(h, w, ch, data).unwrap()
    }

    #[test]
    fn dft_of_constant() {
        let img = ImageBuffer::constant(4, 4, 1, 0.25);
        let spec = fft2(&img);
        assert!((spec.get(0, 0, 0).re - 4.0).abs() < 1e-9);
        for u in 0..4 {
            for v in 0..4 {
                if u == 0 && v == 0 {
                    continue;
                }
                assert!(spec.get(0, u, v).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn single_cycle_cosine_energy_localized() {
        let w = 16;
        let mut img = ImageBuffer::new(8, w, 1);
        for y in 0..8 {
            for x in 0..w {
                let v = 0.5 + 0.5 * (2.0 * std::f64::consts::PI * x as f64 / w as f64).cos();
                img.set(y, x, 0, v as f32);
            }
        }
        let spec = fft2(&img);
        for u in 0..8 {
            for v in 0..w {
                let m = spec.get(0, u, v).norm();
                let expect_energy = u == 0 && (v == 0 || v == 1 || v == w - 1);
                if expect_energy {
                    assert!(m > 1.0, "expected energy at ({u},{v}), got {m}");
                } else {
                    // f32 sample storage quantizes the cosine, leaking
                    // a little energy into every other bin.
                    assert!(m < 1e-4, "unexpected energy {m} at ({u},{v})");
                }
            }
        }
    }

    /// O(N²) direct-summation DFT oracle.
    fn dft_direct(img: &ImageBuffer, c: usize) -> Vec<Complex<f64>> {
        let (h, w) = (img.height(), img.width());
        let mut out = vec![Complex::new(0.0, 0.0); h * w];
        for u in 0..h {
            for v in 0..w {
                let mut acc = Complex::new(0.0, 0.0);
                for y in 0..h {
                    for x in 0..w {
                        let ang = -2.0 * std::f64::consts::PI
                            * (u as f64 * y as f64 / h as f64 + v as f64 * x as f64 / w as f64);
                        acc += Complex::new(ang.cos(), ang.sin()) * img.get(y, x, c) as f64;
                    }
                }
                out[u * w + v] = acc;
            }
        }
        out
    }

    #[test]
    fn fft_matches_direct_dft_on_odd_size() {
        let img = random_img(5, 7, 1, 1);
        let spec = fft2(&img);
        let oracle = dft_direct(&img, 0);
        let norm: f64 = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in spec.plane(0).iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-6 * norm.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn ifft_inverts_fft() {
        let img = random_img(12, 10, 3, 2);
        let back = ifft2_unclamped(&fft2(&img));
        let rms: f64 = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| ((a - b) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
            / (img.data().len() as f64).sqrt();
        assert!(rms < 1e-6);
    }

    #[test]
    fn zero_spectrum_zero_image() {
        let spec = fft2(&ImageBuffer::new(6, 6, 1));
        let img = ifft2(&spec);
        assert!(img.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negated_phase_flips_image() {
        let img = random_img(8, 8, 1, 3);
        let mut spec = fft2(&img);
        for z in spec.plane_mut(0) {
            *z = z.conj();
        }
        let flipped = ifft2_unclamped(&spec);
        // conj of the spectrum of a real signal flips both axes mod N
        for y in 0..8 {
            for x in 0..8 {
                let (fy, fx) = ((8 - y) % 8, (8 - x) % 8);
                assert!((flipped.get(y, x, 0) - img.get(fy, fx, 0)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn conjugate_symmetry_of_real_image_spectrum() {
        let img = random_img(9, 6, 1, 4);
        let spec = fft2(&img);
        let max_mag = spec.magnitude(0).iter().cloned().fold(0.0, f64::max);
        for u in 0..9 {
            for v in 0..6 {
                let a = spec.get(0, u, v);
                let b = spec.get(0, (9 - u) % 9, (6 - v) % 6).conj();
                assert!((a - b).norm() < 1e-6 * max_mag.max(1.0));
            }
        }
    }

    #[test]
    fn parseval_holds() {
        let img = random_img(11, 13, 1, 5);
        let spec = fft2(&img);
        let pixel_energy: f64 = img.data().iter().map(|&v| (v as f64).powi(2)).sum();
        let spec_energy: f64 =
            spec.plane(0).iter().map(|z| z.norm_sqr()).sum::<f64>() / (11.0 * 13.0);
        assert!((pixel_energy - spec_energy).abs() < 1e-5 * pixel_energy.max(1.0));
    }

    #[test]
    fn symmetric_grid_line_count() {
        let img = gen_pattern(&PatternSpec::SymmetricGrid { period: 8 }, 32, 32);
        // 4 horizontal + 4 vertical 1-px lines; union count = 4*32 + 4*32 - 16
        let ones = img.data().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(ones, 4 * 32 + 4 * 32 - 16);
        assert!(img.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn checkerboard_half_ones() {
        let img = gen_pattern(&PatternSpec::SquareCheckerboard { cell: 16 }, 32, 32);
        let ones = img.data().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(ones, 32 * 32 / 2);
    }

    #[test]
    fn circular_checkerboard_ring_parity() {
        let (h, w, rw) = (33usize, 33usize, 5u32);
        let img = gen_pattern(&PatternSpec::CircularCheckerboard { ring_width: rw }, h, w);
        let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
        for y in 0..h {
            for x in 0..w {
                let r = ((y as f64 - cy).powi(2) + (x as f64 - cx).powi(2)).sqrt();
                let expect = ((r / rw as f64).floor() as u64) % 2 == 0;
                assert_eq!(img.get(y, x, 0) == 1.0, expect);
            }
        }
    }

    #[test]
    fn all_patterns_binary_and_deterministic() {
        let ranges = PatternRanges::default();
        for kind in ALL_PATTERN_KINDS {
            let mut r1 = RngStream::new(6).substream("p");
            let mut r2 = RngStream::new(6).substream("p");
            let s1 = sample_pattern_spec(kind, 48, 40, &ranges, &mut r1);
            let s2 = sample_pattern_spec(kind, 48, 40, &ranges, &mut r2);
            assert_eq!(s1, s2);
            let img = gen_pattern(&s1, 48, 40);
            assert!(img.data().iter().all(|&v| v == 0.0 || v == 1.0), "{kind:?}");
        }
    }

    #[test]
    fn inject_k_zero_is_identity() {
        let img = random_img(24, 24, 3, 7);
        let cfg = FreqConfig { k: 0.0, ..FreqConfig::default() };
        let out = inject_frequency_artifact(&img, &PatternSpec::SymmetricGrid { period: 8 }, &cfg);
        let rms: f64 = img
            .data()
            .iter()
            .zip(out.data())
            .map(|(a, b)| ((a - b) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
            / (img.data().len() as f64).sqrt();
        assert!(rms < 1e-5);
    }

    #[test]
    fn inject_k_one_constant_pattern_constant_input() {
        let img = ImageBuffer::constant(16, 16, 3, 0.5);
        // Constant (all-ones) pattern: a degenerate stripe with full duty.
        let spec = PatternSpec::RandomStripes { angle_deg: 0.0, period: 8.0, duty: 1.0 };
        let cfg = FreqConfig { k: 1.0, dc_preserve: true, ..FreqConfig::default() };
        let out = inject_frequency_artifact(&img, &spec, &cfg);
        for &v in out.data() {
            assert!((v - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn inject_adds_stripe_band_energy() {
        let img = random_img(64, 64, 3, 8);
        // Period-8 vertical stripes put energy at normalized frequency 1/8.
        let spec = PatternSpec::RandomStripes { angle_deg: 0.0, period: 8.0, duty: 0.5 };
        let cfg = FreqConfig { k: 0.1, ..FreqConfig::default() };
        let out = inject_frequency_artifact(&img, &spec, &cfg);
        let band = |i: &ImageBuffer| radial_band_energy(i, 0.115, 0.135);
        assert!(band(&out) > 2.0 * band(&img), "band energy should rise");
    }

    #[test]
    fn inject_monotone_in_k() {
        let img = random_img(32, 32, 3, 9);
        let spec = PatternSpec::RandomStripes { angle_deg: 30.0, period: 8.0, duty: 0.4 };
        let mut last = -1.0f64;
        for k in [0.0, 0.05, 0.1, 0.2] {
            let cfg = FreqConfig { k, ..FreqConfig::default() };
            let out = inject_frequency_artifact(&img, &spec, &cfg);
            let rms: f64 = img
                .data()
                .iter()
                .zip(out.data())
                .map(|(a, b)| ((a - b) as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(rms >= last, "rms {rms} < previous {last} at k={k}");
            last = rms;
        }
    }

    #[test]
    fn inject_preserves_phase_and_realness() {
        let img = random_img(24, 24, 1, 10);
        let spec = PatternSpec::SquareCheckerboard { cell: 8 };
        let cfg = FreqConfig::default();
        let out = inject_frequency_artifact_unclamped(&img, &spec, &cfg);

        // Realness: rebuild the manipulated spectrum and check imaginary
        // residuals of its inverse.
        let pattern = gen_pattern(&spec, 24, 24);
        let _ = pattern;
        let orig = fft2(&img);
        let new = fft2(&out);
        for (a, b) in new.plane(0).iter().zip(orig.plane(0)) {
            if b.norm() > 1e-9 && a.norm() > 1e-9 {
                let mut d = (a.arg() - b.arg()).abs();
                if d > std::f64::consts::PI {
                    d = 2.0 * std::f64::consts::PI - d;
                }
                assert!(d < 1e-4, "phase deviation {d}");
            }
        }
    }
}
