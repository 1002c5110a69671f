use super::{BoundingBox, ImageBuffer, ImageError};

/// Rounding convention for every continuous-to-pixel conversion.
#[inline]
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Pixel window `(y_start, x_start, height, width)` produced by growing
/// `bbox` by `margin`·side about its center and clipping to the image.
pub fn crop_window(
    img_h: usize,
    img_w: usize,
    bbox: BoundingBox,
    margin: f64,
) -> Result<(usize, usize, usize, usize), ImageError> {
    assert!((0.0..=0.5).contains(&margin), "margin must be in [0, 0.5]");
    let (h, w) = (img_h as i64, img_w as i64);
    if bbox.side <= 0
        || bbox.x0 < 0
        || bbox.y0 < 0
        || bbox.x0 + bbox.side > w
        || bbox.y0 + bbox.side > h
    {
        return Err(ImageError::BoxOutOfBounds(format!(
            "box ({}, {}, side {}) in {h}x{w} image",
            bbox.x0, bbox.y0, bbox.side
        )));
    }
    let grown = bbox.side as f64 * (1.0 + margin);
    let side = round_half_up(grown);
    let cx = bbox.x0 as f64 + bbox.side as f64 / 2.0;
    let cy = bbox.y0 as f64 + bbox.side as f64 / 2.0;
    let x0 = round_half_up(cx - side as f64 / 2.0);
    let y0 = round_half_up(cy - side as f64 / 2.0);
    let x_start = x0.max(0);
    let y_start = y0.max(0);
    let x_end = (x0 + side).min(w);
    let y_end = (y0 + side).min(h);
    Ok((
        y_start as usize,
        x_start as usize,
        (y_end - y_start) as usize,
        (x_end - x_start) as usize,
    ))
}

/// Enlarge `box` by `margin`·side on each dimension (centered), clip to
/// image bounds and crop.
pub fn crop_with_margin(
    img: &ImageBuffer,
    bbox: BoundingBox,
    margin: f64,
) -> Result<ImageBuffer, ImageError> {
    let (y_start, x_start, oh, ow) = crop_window(img.height(), img.width(), bbox, margin)?;
    let mut out = ImageBuffer::new(oh, ow, img.channels());
    for y in 0..oh {
        for x in 0..ow {
            for c in 0..img.channels() {
                out.set(y, x, c, img.get(y + y_start, x + x_start, c));
            }
        }
    }
    Ok(out)
}

/// Bilinear resize with half-pixel-centered sampling.
///
/// The lerp form keeps constant images exactly constant and an identity
/// resize bit-identical.
pub fn resize_bilinear(img: &ImageBuffer, out_h: usize, out_w: usize) -> ImageBuffer {
    assert!(out_h >= 1 && out_w >= 1);
    let sy = img.height() as f64 / out_h as f64;
    let sx = img.width() as f64 / out_w as f64;
    let mut out = ImageBuffer::new(out_h, out_w, img.channels());
    for y in 0..out_h {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..out_w {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            for c in 0..img.channels() {
                out.set(y, x, c, sample_bilinear(img, src_y, src_x, c));
            }
        }
    }
    out
}

/// Bilinear sample at continuous (y, x) with edge replication.
#[inline]
pub fn sample_bilinear(img: &ImageBuffer, y: f64, x: f64, c: usize) -> f32 {
    let y0 = y.floor();
    let x0 = x.floor();
    let fy = y - y0;
    let fx = x - x0;
    let (yi, xi) = (y0 as i64, x0 as i64);
    let v00 = img.get_clamped(yi, xi, c) as f64;
    let v01 = img.get_clamped(yi, xi + 1, c) as f64;
    let v10 = img.get_clamped(yi + 1, xi, c) as f64;
    let v11 = img.get_clamped(yi + 1, xi + 1, c) as f64;
    let top = v00 + (v01 - v00) * fx;
    let bot = v10 + (v11 - v10) * fx;
    (top + (bot - top) * fy) as f32
}

/// Inverse-mapped warp: out(y, x) = img(map(y, x)) with bilinear
/// sampling and edge replication. `map` returns source (y, x).
pub fn warp_bilinear<F>(img: &ImageBuffer, map: F) -> ImageBuffer
where
    F: Fn(usize, usize) -> (f64, f64),
{
    let mut out = ImageBuffer::new(img.height(), img.width(), img.channels());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (sy, sx) = map(y, x);
            for c in 0..img.channels() {
                out.set(y, x, c, sample_bilinear(img, sy, sx, c));
            }
        }
    }
    out
}

/// Separable Gaussian blur, truncated at radius ceil(3σ), edge
/// replication. σ=0 is the identity.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    let mut sum = 0.0f64;
    for i in -radius..=radius {
        let w = (-(i as f64 * i as f64) / (2.0 * sigma * sigma)).exp();
        kernel.push(w);
        sum += w;
    }
    for w in &mut kernel {
        *w /= sum;
    }

    let (h, w, ch) = (img.height(), img.width(), img.channels());
    // Horizontal pass.
    let mut tmp = ImageBuffer::new(h, w, ch);
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0f64;
                for (ki, &kw) in kernel.iter().enumerate() {
                    let sxi = x as i64 + ki as i64 - radius;
                    acc += kw * img.get_clamped(y as i64, sxi, c) as f64;
                }
                tmp.set(y, x, c, acc as f32);
            }
        }
    }
    // Vertical pass.
    let mut out = ImageBuffer::new(h, w, ch);
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0f64;
                for (ki, &kw) in kernel.iter().enumerate() {
                    let syi = y as i64 + ki as i64 - radius;
                    acc += kw * tmp.get_clamped(syi, x as i64, c) as f64;
                }
                out.set(y, x, c, acc as f32);
            }
        }
    }
    out
}
