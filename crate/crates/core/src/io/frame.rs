use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Decoded RGB image, row-major interleaved `(R, G, B)` components in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> RgbFrame<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if data.len() != width * height * 3 {
            return Err(Error::InvalidFrame(format!(
                "{width}x{height} frame needs {} components, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|v| !v.is_finite() || *v < T::zero() || *v > T::one())
        {
            return Err(Error::InvalidFrame(format!(
                "component {i} = {} outside [0, 1]",
                data[i]
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a frame by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [T; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn uniform(width: usize, height: usize, rgb: [T; 3]) -> Result<Self> {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [T; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Converts the component type, e.g. `f64` to `f32`.
    pub fn cast<U: Scalar>(&self) -> RgbFrame<U> {
        RgbFrame {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Per-channel standardized frame, same layout as [`RgbFrame`] but unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFrame<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

/// Channel mean/std used for input standardization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConstants {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

pub const IMAGENET: NormalizationConstants = NormalizationConstants {
    mean: [0.485, 0.456, 0.406],
    std: [0.229, 0.224, 0.225],
};

impl Default for NormalizationConstants {
    fn default() -> Self {
        IMAGENET
    }
}

pub fn imagenet_normalize<T: Scalar>(
    frame: &RgbFrame<T>,
    constants: &NormalizationConstants,
) -> NormalizedFrame<T> {
    let mean = constants.mean.map(T::lit);
    let std = constants.std.map(T::lit);
    let data = frame
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - mean[i % 3]) / std[i % 3])
        .collect();
    NormalizedFrame {
        width: frame.width,
        height: frame.height,
        data,
    }
}

/// Inverse of [`imagenet_normalize`]. Values are not clamped back into `[0, 1]`.
pub fn imagenet_denormalize<T: Scalar>(
    frame: &NormalizedFrame<T>,
    constants: &NormalizationConstants,
) -> Vec<T> {
    let mean = constants.mean.map(T::lit);
    let std = constants.std.map(T::lit);
    frame
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| v * std[i % 3] + mean[i % 3])
        .collect()
}

/// Decodes an 8-bit PNG or JPEG; components are mapped to `[0, 1]` by `v / 255`.
pub fn decode_image<T: Scalar>(bytes: &[u8]) -> Result<RgbFrame<T>> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let scale = T::lit(255.0);
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|v| T::lit(f64::from(v)) / scale)
        .collect();
    RgbFrame::new(w as usize, h as usize, data)
}

pub fn load_image<T: Scalar>(path: &Path) -> Result<RgbFrame<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode(msg) => Error::Decode(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Encodes a frame as 8-bit PNG, rounding each component to the nearest level.
pub fn encode_png<T: Scalar>(frame: &RgbFrame<T>) -> Result<Vec<u8>> {
    let raw: Vec<u8> = frame
        .data
        .iter()
        .map(|v| (v.as_f64() * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let img = image::RgbImage::from_raw(frame.width as u32, frame.height as u32, raw)
        .ok_or_else(|| Error::Encode("buffer size mismatch".into()))?;
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out.into_inner())
}
