use super::ImageError;

/// H×W×C raster with real values in [0,1], row-major, channel-interleaved.
///
/// Every public pipeline operation is responsible for clamping its own
/// output back into [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_vec(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::Dims(format!("channels must be 1 or 3, got {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(ImageError::Dims(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn constant(height: usize, width: usize, channels: usize, value: f32) -> Self {
        let mut img = Self::new(height, width, channels);
        img.data.fill(value);
        img
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Sample with edge replication at integer coordinates.
    #[inline]
    pub fn get_clamped(&self, y: i64, x: i64, c: usize) -> f32 {
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        self.get(y, x, c)
    }

    pub fn clamp_in_place(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Extract one channel as a single-channel buffer.
    pub fn channel(&self, c: usize) -> ImageBuffer {
        let mut out = ImageBuffer::new(self.height, self.width, 1);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(y, x, 0, self.get(y, x, c));
            }
        }
        out
    }
}

/// Square face region in source-image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub x0: i64,
    pub y0: i64,
    pub side: i64,
}

impl BoundingBox {
    /// Full-image box, used when no sidecar entry exists.
    pub fn full(height: usize, width: usize) -> Self {
        Self { x0: 0, y0: 0, side: height.min(width) as i64 }
    }
}
