use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ImageBuffer, ImageError};

/// Load an 8-bit raster (binary PPM/PGM, or PNG) into [0,1] by v/255.
pub fn load_image(path: &Path) -> Result<ImageBuffer, ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "ppm" | "pgm" | "pnm" => load_pnm(path),
        "png" => load_png(path),
        other => Err(ImageError::Format(format!("unsupported extension: {other:?}"))),
    }
}

/// Save as binary PPM (3 channels) or PGM (1 channel), or PNG by extension.
///
/// Storage value is round(v*255) clamped to [0,255]; output bytes are
/// deterministic for identical input.
pub fn save_image(img: &ImageBuffer, path: &Path) -> Result<(), ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "ppm" | "pgm" | "pnm" => save_pnm(img, path),
        "png" => save_png(img, path),
        other => Err(ImageError::Format(format!("unsupported extension: {other:?}"))),
    }
}

/// Quantize one sample to 8 bits: round-half-up, clamped.
#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    let scaled = (v as f64 * 255.0 + 0.5).floor();
    scaled.clamp(0.0, 255.0) as u8
}

fn load_pnm(path: &Path) -> Result<ImageBuffer, ImageError> {
    let bytes = fs::read(path)?;
    parse_pnm(&bytes)
}

pub(crate) fn parse_pnm(bytes: &[u8]) -> Result<ImageBuffer, ImageError> {
    let mut pos = 0usize;
    let magic = read_token(bytes, &mut pos)
        .ok_or_else(|| ImageError::Format("missing PNM magic".into()))?;
    let channels = match magic.as_str() {
        "P6" => 3,
        "P5" => 1,
        m => return Err(ImageError::Format(format!("unsupported PNM magic {m:?}"))),
    };
    let width: usize = parse_header_int(bytes, &mut pos, "width")?;
    let height: usize = parse_header_int(bytes, &mut pos, "height")?;
    let maxval: usize = parse_header_int(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::Format("zero-sized image".into()));
    }
    if maxval != 255 {
        return Err(ImageError::Format(format!("only maxval 255 supported, got {maxval}")));
    }
    // Single whitespace byte separates the header from pixel data.
    pos += 1;
    let need = width * height * channels;
    if bytes.len() < pos + need {
        return Err(ImageError::Format("truncated PNM pixel data".into()));
    }
    let data = bytes[pos..pos + need]
        .iter()
        .map(|&b| b as f32 / 255.0)
        .collect();
    ImageBuffer::from_vec(height, width, channels, data)
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, ImageError> {
    read_token(bytes, pos)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| ImageError::Format(format!("bad PNM header field: {what}")))
}

/// Read one whitespace-delimited token, skipping `#` comments.
fn read_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    } else {
        None
    }
}

fn save_pnm(img: &ImageBuffer, path: &Path) -> Result<(), ImageError> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = Vec::with_capacity(32 + img.data().len());
    write!(out, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
    out.extend(img.data().iter().map(|&v| quantize(v)));
    fs::write(path, out)?;
    Ok(())
}

fn load_png(path: &Path) -> Result<ImageBuffer, ImageError> {
    let dyn_img = image::open(path).map_err(|e| ImageError::Format(e.to_string()))?;
    let (w, h) = (dyn_img.width() as usize, dyn_img.height() as usize);
    if w == 0 || h == 0 {
        return Err(ImageError::Format("zero-sized image".into()));
    }
    match dyn_img {
        image::DynamicImage::ImageLuma8(gray) => {
            let data = gray.as_raw().iter().map(|&b| b as f32 / 255.0).collect();
            ImageBuffer::from_vec(h, w, 1, data)
        }
        other => {
            let rgb = other.to_rgb8();
            let data = rgb.as_raw().iter().map(|&b| b as f32 / 255.0).collect();
            ImageBuffer::from_vec(h, w, 3, data)
        }
    }
}

fn save_png(img: &ImageBuffer, path: &Path) -> Result<(), ImageError> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let res = if img.channels() == 3 {
        image::save_buffer(path, &bytes, w, h, image::ColorType::Rgb8)
    } else {
        image::save_buffer(path, &bytes, w, h, image::ColorType::L8)
    };
    res.map_err(|e| ImageError::Format(e.to_string()))
}

/// Save a single-channel buffer as binary PGM (debug spectra, masks).
pub fn save_pgm(img: &ImageBuffer, path: &Path) -> Result<(), ImageError> {
    if img.channels() != 1 {
        return Err(ImageError::Dims("PGM output requires a single channel".into()));
    }
    save_pnm(img, path)
}

/// Load a segmentation map (8-bit single-channel PGM or PNG) as raw
/// class indices. Returns (height, width, indices).
pub fn load_seg_map(path: &Path) -> Result<(usize, usize, Vec<u8>), ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" | "pnm" => {
            let bytes = fs::read(path)?;
            let img = parse_pnm(&bytes)?;
            if img.channels() != 1 {
                return Err(ImageError::Format("segmentation map must be single-channel".into()));
            }
            let idx = img.data().iter().map(|&v| (v * 255.0).round() as u8).collect();
            Ok((img.height(), img.width(), idx))
        }
        "png" => {
            let dyn_img = image::open(path).map_err(|e| ImageError::Format(e.to_string()))?;
            let gray = dyn_img.to_luma8();
            let (w, h) = (gray.width() as usize, gray.height() as usize);
            Ok((h, w, gray.as_raw().clone()))
        }
        other => Err(ImageError::Format(format!("unsupported seg-map extension: {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn all_255_ppm_loads_as_ones() {
        let bytes = b"P6\n2 2\n255\n\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff";
        let img = parse_pnm(bytes).unwrap();
        assert!(img.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn linear_scaling_1x1() {
        let bytes = b"P6\n1 1\n255\n\x00\x80\xff";
        let img = parse_pnm(bytes).unwrap();
        assert_eq!(img.get(0, 0, 0), 0.0);
        assert_eq!(img.get(0, 0, 1), 128.0 / 255.0);
        assert_eq!(img.get(0, 0, 2), 1.0);
    }

    #[test]
    fn truncated_ppm_rejected() {
        let bytes = b"P6\n2 2\n255\n\xff\xff";
        assert!(parse_pnm(bytes).is_err());
    }

    #[test]
    fn zero_sized_rejected() {
        let bytes = b"P6\n0 2\n255\n";
        assert!(parse_pnm(bytes).is_err());
    }

    #[test]
    fn comments_in_header_skipped() {
        let bytes = b"P6\n# a comment\n1 1\n255\n\x01\x02\x03";
        let img = parse_pnm(bytes).unwrap();
        assert_eq!(img.get(0, 0, 2), 3.0 / 255.0);
    }

    #[test]
    fn rounding_convention() {
        // round(127.5) = 128 under round-half-up
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.5), 255);
        assert_eq!(quantize(-0.2), 0);
    }

    #[test]
    fn roundtrip_bit_identical_file() {
        let dir = tempdir().unwrap();
        let p1 = dir.path().join("a.ppm");
        let p2 = dir.path().join("b.ppm");
        let mut r = crate::imgcore::RngStream::new(3);
        let data: Vec<f32> = (0..4 * 5 * 3)
            .map(|_| (r.below(256) as f32) / 255.0)
            .collect();
        let img = ImageBuffer::from_vec(4, 5, 3, data).unwrap();
        save_image(&img, &p1).unwrap();
        let back = load_image(&p1).unwrap();
        save_image(&back, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn quantization_bound_on_roundtrip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("q.ppm");
        let mut r = crate::imgcore::RngStream::new(11);
        let data: Vec<f32> = (0..8 * 8 * 3).map(|_| r.uniform() as f32).collect();
        let img = ImageBuffer::from_vec(8, 8, 3, data).unwrap();
        save_image(&img, &p).unwrap();
        let back = load_image(&p).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 1.0 / 510.0 + 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.png");
        let img = ImageBuffer::constant(5, 7, 3, 0.25);
        save_image(&img, &p).unwrap();
        let back = load_image(&p).unwrap();
        assert_eq!(back.height(), 5);
        assert_eq!(back.width(), 7);
        assert!((back.get(2, 3, 1) - 64.0 / 255.0).abs() < 1e-6);
    }
}
