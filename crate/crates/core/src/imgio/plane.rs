use crate::error::{Error, Result};
use crate::scalar::Real;

/// Single-channel row-major image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> ImagePlane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "empty plane {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "empty plane");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "empty plane");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with coordinates clamped to the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> ImagePlane<U> {
        ImagePlane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|v| U::from(*v).unwrap_or_else(U::nan))
                .collect(),
        }
    }

    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.max(T::zero()).min(T::one());
        }
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::from_usize_lossy(self.data.len())
    }

    pub fn energy(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    pub fn min_max(&self) -> (T, T) {
        self.data
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn same_dims<U>(&self, other: &ImagePlane<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Quantize to 8 bits (round half away from zero after clamping).
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| quantize_u8(v.to_f64_lossy()))
            .collect()
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| T::lit(b as f64 / 255.0)).collect();
        Self::new(width, height, data)
    }
}

pub(crate) fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Three-plane BT.601 full-range luma/chroma image. Chroma planes are offset
/// so that an achromatic pixel has Cb = Cr = 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage<T> {
    pub y: ImagePlane<T>,
    pub cb: ImagePlane<T>,
    pub cr: ImagePlane<T>,
}

impl<T: Real> ColorImage<T> {
    pub fn new(y: ImagePlane<T>, cb: ImagePlane<T>, cr: ImagePlane<T>) -> Result<Self> {
        if !y.same_dims(&cb) || !y.same_dims(&cr) {
            return Err(Error::DimensionMismatch(format!(
                "planes {:?} / {:?} / {:?}",
                y.dims(),
                cb.dims(),
                cr.dims()
            )));
        }
        Ok(Self { y, cb, cr })
    }

    /// Achromatic image from a luma plane.
    pub fn from_gray(y: ImagePlane<T>) -> Self {
        let (w, h) = y.dims();
        let half = T::lit(0.5);
        Self {
            y,
            cb: ImagePlane::filled(w, h, half),
            cr: ImagePlane::filled(w, h, half),
        }
    }

    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.y.dims()
    }

    pub fn planes(&self) -> [&ImagePlane<T>; 3] {
        [&self.y, &self.cb, &self.cr]
    }

    pub fn planes_mut(&mut self) -> [&mut ImagePlane<T>; 3] {
        [&mut self.y, &mut self.cb, &mut self.cr]
    }

    pub fn is_gray(&self) -> bool {
        let half = T::lit(0.5);
        self.cb.as_slice().iter().all(|&v| v == half)
            && self.cr.as_slice().iter().all(|&v| v == half)
    }

    /// Build from interleaved 8-bit RGB.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::LengthMismatch {
                expected: width * height * 3,
                got: rgb.len(),
            });
        }
        let n = width * height;
        let (mut y, mut cb, mut cr) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for px in rgb.chunks_exact(3) {
            let [l, b, r] = rgb_to_ycbcr(
                px[0] as f64 / 255.0,
                px[1] as f64 / 255.0,
                px[2] as f64 / 255.0,
            );
            y.push(T::lit(l));
            cb.push(T::lit(b));
            cr.push(T::lit(r));
        }
        Self::new(
            ImagePlane::new(width, height, y)?,
            ImagePlane::new(width, height, cb)?,
            ImagePlane::new(width, height, cr)?,
        )
    }

    /// Interleaved 8-bit RGB.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.y.len() * 3);
        for ((&l, &b), &r) in self
            .y
            .as_slice()
            .iter()
            .zip(self.cb.as_slice())
            .zip(self.cr.as_slice())
        {
            let rgb = ycbcr_to_rgb(l.to_f64_lossy(), b.to_f64_lossy(), r.to_f64_lossy());
            out.extend(rgb.iter().map(|&c| quantize_u8(c)));
        }
        out
    }

    pub fn cast<U: Real>(&self) -> ColorImage<U> {
        ColorImage {
            y: self.y.cast(),
            cb: self.cb.cast(),
            cr: self.cr.cast(),
        }
    }
}

/// BT.601 full-range RGB to (Y, Cb, Cr), all in [0, 1].
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> [f64; 3] {
    let y = KR * r + KG * g + KB * b;
    let cb = 0.5 + (b - y) / (2.0 * (1.0 - KB));
    let cr = 0.5 + (r - y) / (2.0 * (1.0 - KR));
    [y, cb, cr]
}

pub fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> [f64; 3] {
    let r = y + 2.0 * (1.0 - KR) * (cr - 0.5);
    let b = y + 2.0 * (1.0 - KB) * (cb - 0.5);
    let g = (y - KR * r - KB * b) / KG;
    [r, g, b]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_length_checked() {
        assert!(ImagePlane::<f64>::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ImagePlane::<f64>::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn red_luma_uses_bt601_weight() {
        let img = ColorImage::<f64>::from_rgb8(1, 1, &[255, 0, 0]).unwrap();
        assert!((img.y.get(0, 0) - 0.299).abs() < 1e-6);
        assert!((img.cr.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ycbcr_round_trip() {
        for &(r, g, b) in &[
            (0.1, 0.7, 0.3),
            (1.0, 1.0, 1.0),
            (0.0, 0.0, 0.0),
            (0.9, 0.2, 0.5),
        ] {
            let [y, cb, cr] = rgb_to_ycbcr(r, g, b);
            let [r2, g2, b2] = ycbcr_to_rgb(y, cb, cr);
            assert!((r - r2).abs() < 1e-12 && (g - g2).abs() < 1e-12 && (b - b2).abs() < 1e-12);
        }
    }

    #[test]
    fn gray_rgb_is_achromatic() {
        let img = ColorImage::<f64>::from_rgb8(1, 1, &[77, 77, 77]).unwrap();
        assert!((img.cb.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((img.cr.get(0, 0) - 0.5).abs() < 1e-12);
        assert_eq!(img.to_rgb8(), vec![77, 77, 77]);
    }

    #[test]
    fn clamped_access_replicates_edges() {
        let p = ImagePlane::<f64>::from_fn(3, 2, |x, y| (x + 10 * y) as f64);
        assert_eq!(p.get_clamped(-4, 0), 0.0);
        assert_eq!(p.get_clamped(5, 7), 12.0);
    }
}
