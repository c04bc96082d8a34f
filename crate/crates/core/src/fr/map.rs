//! Distortion maps and their export formats.
//!
//! Raw maps are written as a 16-byte header (`WEQAMAP1`, width `u32` LE,
//! height `u32` LE) followed by `width * height` little-endian `f32` values
//! in row-major order.

use byteorder::{ByteOrder, LittleEndian};

use crate::error::{Error, Result};
use crate::imgio::ImagePlane;
use crate::scalar::Real;

pub const RAW_MAP_MAGIC: &[u8; 8] = b"WEQAMAP1";

/// Per-pixel nonnegative distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMap<T> {
    plane: ImagePlane<T>,
}

impl<T: Real> DistortionMap<T> {
    pub fn new(plane: ImagePlane<T>) -> Result<Self> {
        if let Some(bad) = plane
            .as_slice()
            .iter()
            .find(|v| !(v.is_finite() && **v >= T::zero()))
        {
            return Err(Error::InvalidConfig(format!(
                "distortion map entries must be finite and >= 0, found {bad}"
            )));
        }
        Ok(Self { plane })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            plane: ImagePlane::zeros(width, height),
        }
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.plane.get(x, y)
    }

    pub fn values(&self) -> &[T] {
        self.plane.as_slice()
    }

    pub fn plane(&self) -> &ImagePlane<T> {
        &self.plane
    }

    pub fn mean(&self) -> T {
        self.plane.mean()
    }

    pub fn min_max(&self) -> (T, T) {
        self.plane.min_max()
    }

    /// Affine rescale to [0, 1] for 8-bit export; returns the plane and the
    /// `(min, max)` used. A constant map exports as all zeros.
    pub fn normalized(&self) -> (ImagePlane<f64>, f64, f64) {
        let (lo, hi) = self.min_max();
        let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
        let span = hi - lo;
        let plane = self
            .plane
            .cast::<f64>()
            .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 });
        (plane, lo, hi)
    }

    pub fn to_raw_bytes(&self) -> Vec<u8> {
        let (w, h) = self.dims();
        let mut out = vec![0u8; 16 + 4 * w * h];
        out[..8].copy_from_slice(RAW_MAP_MAGIC);
        LittleEndian::write_u32(&mut out[8..12], w as u32);
        LittleEndian::write_u32(&mut out[12..16], h as u32);
        for (chunk, v) in out[16..].chunks_exact_mut(4).zip(self.values()) {
            LittleEndian::write_f32(chunk, v.to_f32().unwrap_or(f32::NAN));
        }
        out
    }

    pub fn from_raw_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != RAW_MAP_MAGIC {
            return Err(Error::format("raw map", "missing WEQAMAP1 header"));
        }
        let w = LittleEndian::read_u32(&bytes[8..12]) as usize;
        let h = LittleEndian::read_u32(&bytes[12..16]) as usize;
        let need = w
            .checked_mul(h)
            .and_then(|n| n.checked_mul(4))
            .and_then(|n| n.checked_add(16))
            .ok_or_else(|| Error::format("raw map", "dimensions overflow"))?;
        if bytes.len() != need {
            return Err(Error::format(
                "raw map",
                format!("expected {need} bytes for {w}x{h}, found {}", bytes.len()),
            ));
        }
        let data = bytes[16..]
            .chunks_exact(4)
            .map(|c| T::lit(LittleEndian::read_f32(c) as f64))
            .collect();
        Self::new(ImagePlane::new(w, h, data)?)
    }
}
