// Shared by several integration-test binaries; not all use every item.
#![allow(dead_code)]

use std::path::Path;

use selfmad_core::imgcore::save_image;
use selfmad_core::{ImageBuffer, RngStream};

/// Procedurally generated face-like image: skin-tone ellipse on a
/// gradient background with eyes, mouth and smooth low-frequency
/// lighting noise. Deterministic in (seed, idx).
pub fn gen_face(seed: u64, idx: usize, size: usize) -> ImageBuffer {
    let mut rng = RngStream::new(seed).substream("face").substream(idx);
    let n = size as f64;
    let bg = [rng.range(0.1, 0.4), rng.range(0.1, 0.4), rng.range(0.2, 0.5)];
    let skin = [rng.range(0.55, 0.85), rng.range(0.40, 0.65), rng.range(0.30, 0.55)];
    let cx = n * rng.range(0.45, 0.55);
    let cy = n * rng.range(0.45, 0.55);
    let rx = n * rng.range(0.26, 0.34);
    let ry = n * rng.range(0.32, 0.42);
    let eye_dx = rx * rng.range(0.35, 0.5);
    let eye_dy = ry * rng.range(0.25, 0.4);
    let eye_r = n * rng.range(0.02, 0.035);
    let mouth_dy = ry * rng.range(0.35, 0.55);
    let mouth_rx = rx * rng.range(0.3, 0.5);
    let mouth_ry = n * rng.range(0.012, 0.025);
    // Smooth lighting: a couple of low-frequency cosines.
    let waves: Vec<[f64; 3]> = (0..3)
        .map(|_| [rng.range(0.5, 2.5), rng.range(0.5, 2.5), rng.range(0.0, std::f64::consts::TAU)])
        .collect();
    let amp = rng.range(0.02, 0.06);

    let mut img = ImageBuffer::new(size, size, 3);
    for y in 0..size {
        for x in 0..size {
            let (xf, yf) = (x as f64, y as f64);
            let in_face = sq((xf - cx) / rx) + sq((yf - cy) / ry) <= 1.0;
            let left_eye = sq((xf - (cx - eye_dx)) / eye_r) + sq((yf - (cy - eye_dy)) / eye_r) <= 1.0;
            let right_eye =
                sq((xf - (cx + eye_dx)) / eye_r) + sq((yf - (cy - eye_dy)) / eye_r) <= 1.0;
            let mouth = sq((xf - cx) / mouth_rx) + sq((yf - (cy + mouth_dy)) / mouth_ry) <= 1.0;
            let base = if left_eye || right_eye {
                [0.08, 0.08, 0.1]
            } else if mouth {
                [0.6, 0.2, 0.25]
            } else if in_face {
                skin
            } else {
                // Vertical background gradient.
                let t = yf / n;
                [bg[0] * (1.0 - 0.3 * t), bg[1] * (1.0 - 0.3 * t), bg[2]]
            };
            let mut light = 0.0;
            for wv in &waves {
                light += (std::f64::consts::TAU * (wv[0] * xf / n + wv[1] * yf / n) + wv[2]).cos();
            }
            light *= amp / 3.0;
            for c in 0..3 {
                img.set(y, x, c, (base[c] + light).clamp(0.0, 1.0) as f32);
            }
        }
    }
    img
}

fn sq(v: f64) -> f64 {
    v * v
}

/// Write `count` faces as PPM files named face000.ppm… into `dir`.
pub fn write_corpus(dir: &Path, count: usize, seed: u64, size: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..count {
        let img = gen_face(seed, i, size);
        save_image(&img, &dir.join(format!("face{i:03}.ppm"))).unwrap();
    }
}

/// Byte-compare two directory trees (sorted relative paths and file
/// contents must match exactly).
pub fn assert_dirs_identical(a: &Path, b: &Path) {
    let list = |root: &Path| {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d).unwrap() {
                let p = entry.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push(p.strip_prefix(root).unwrap().to_path_buf());
                }
            }
        }
        files.sort();
        files
    };
    let fa = list(a);
    let fb = list(b);
    assert_eq!(fa, fb, "file sets differ between {} and {}", a.display(), b.display());
    for rel in &fa {
        let ba = std::fs::read(a.join(rel)).unwrap();
        let bb = std::fs::read(b.join(rel)).unwrap();
        assert_eq!(ba, bb, "file {} differs", rel.display());
    }
}
