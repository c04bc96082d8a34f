use crate::error::{Error, Result};
use crate::imgio::{ColorImage, ImagePlane};
use crate::scalar::Real;
use crate::wavelet::WaveletPyramid;

/// Color-vector length: `Cb, Cr, mean Y, std Y, mean E, std E` with
/// `E = (Cb - 0.5)^2 + (Cr - 0.5)^2` over the 3x3 neighborhood.
pub const COLOR_DIM: usize = 6;
/// Neighborhood block: gradient magnitude, Laplacian energy, min Y, max Y.
pub const NEIGH_DIM: usize = 4;

/// Descriptor length for wave-vectors of length `m`.
pub const fn feature_dim(m: usize) -> usize {
    m + COLOR_DIM + NEIGH_DIM
}

/// `[wave-vector (M) | color-vector (6) | neighborhood (4)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDescriptor(pub Vec<f32>);

impl PixelDescriptor {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn wave(&self) -> &[f32] {
        &self.0[..self.0.len() - COLOR_DIM - NEIGH_DIM]
    }

    pub fn color(&self) -> &[f32] {
        let m = self.0.len() - COLOR_DIM - NEIGH_DIM;
        &self.0[m..m + COLOR_DIM]
    }

    pub fn neighborhood(&self) -> &[f32] {
        &self.0[self.0.len() - NEIGH_DIM..]
    }
}

fn window3<T: Real>(p: &ImagePlane<T>, x: usize, y: usize) -> [[f64; 3]; 3] {
    let mut w = [[0.0; 3]; 3];
    for (dy, row) in w.iter_mut().enumerate() {
        for (dx, v) in row.iter_mut().enumerate() {
            *v = p
                .get_clamped(x as isize + dx as isize - 1, y as isize + dy as isize - 1)
                .to_f64_lossy();
        }
    }
    w
}

fn mean_std(w: &[[f64; 3]; 3]) -> (f64, f64) {
    let mean = w.iter().flatten().sum::<f64>() / 9.0;
    let var = w.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0;
    (mean, var.sqrt())
}

pub(crate) fn check_geometry<T: Real>(img: &ColorImage<T>, pyr: &WaveletPyramid<T>) -> Result<()> {
    if img.dims() != (pyr.width(), pyr.height()) {
        return Err(Error::DimensionMismatch(format!(
            "image {:?} vs pyramid {}x{}",
            img.dims(),
            pyr.width(),
            pyr.height()
        )));
    }
    Ok(())
}

/// Fill `out` (length `feature_dim(M)`) for pixel `(x, y)`; coordinates are
/// not bounds-checked.
pub fn describe_into<T: Real>(
    img: &ColorImage<T>,
    pyr: &WaveletPyramid<T>,
    x: usize,
    y: usize,
    wave_buf: &mut [T],
    out: &mut [f32],
) {
    let m = pyr.vector_len();
    debug_assert_eq!(out.len(), feature_dim(m));
    pyr.wave_vector_into(x, y, wave_buf);
    for (o, v) in out.iter_mut().zip(wave_buf.iter()) {
        *o = v.to_f32().unwrap_or(f32::NAN);
    }

    let wy = window3(&img.y, x, y);
    let wcb = window3(&img.cb, x, y);
    let wcr = window3(&img.cr, x, y);
    let mut energy = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            energy[r][c] = (wcb[r][c] - 0.5).powi(2) + (wcr[r][c] - 0.5).powi(2);
        }
    }
    let (mean_y, std_y) = mean_std(&wy);
    let (mean_e, std_e) = mean_std(&energy);

    let mut gx = 0.0;
    let mut gy = 0.0;
    for (r, row) in wy.iter().enumerate() {
        for c in 0..2 {
            gx += (row[c + 1] - row[c]).abs();
            gy += (wy[c + 1][r] - wy[c][r]).abs();
        }
    }
    let (gx, gy) = (gx / 6.0, gy / 6.0);
    let grad = (gx * gx + gy * gy).sqrt();
    let lap = 4.0 * wy[1][1] - wy[0][1] - wy[2][1] - wy[1][0] - wy[1][2];
    let (lo, hi) = wy
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });

    let tail = [
        wcb[1][1],
        wcr[1][1],
        mean_y,
        std_y,
        mean_e,
        std_e,
        grad,
        lap * lap,
        lo,
        hi,
    ];
    for (o, v) in out[m..].iter_mut().zip(tail) {
        *o = v as f32;
    }
}

pub fn describe_pixel<T: Real>(
    img: &ColorImage<T>,
    pyr: &WaveletPyramid<T>,
    x: usize,
    y: usize,
) -> Result<PixelDescriptor> {
    check_geometry(img, pyr)?;
    if x >= img.width() || y >= img.height() {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: img.width(),
            height: img.height(),
        });
    }
    let m = pyr.vector_len();
    let mut buf = vec![T::zero(); m];
    let mut out = vec![0.0f32; feature_dim(m)];
    describe_into(img, pyr, x, y, &mut buf, &mut out);
    Ok(PixelDescriptor(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{dwt2, WaveletFilter};

    fn describe(img: &ColorImage<f64>, levels: usize, x: usize, y: usize) -> PixelDescriptor {
        let pyr = dwt2(&img.y, levels, WaveletFilter::Haar).unwrap();
        describe_pixel(img, &pyr, x, y).unwrap()
    }

    #[test]
    fn layout_and_dimension() {
        let img = ColorImage::from_gray(ImagePlane::<f64>::filled(16, 16, 0.4));
        let d = describe(&img, 2, 3, 3);
        assert_eq!(d.len(), feature_dim(7));
        assert_eq!(d.wave().len(), 7);
        assert_eq!(d.color().len(), COLOR_DIM);
        assert_eq!(d.neighborhood().len(), NEIGH_DIM);
    }

    #[test]
    fn constant_gray_image() {
        let img = ColorImage::from_gray(ImagePlane::<f64>::filled(16, 16, 0.4));
        let d = describe(&img, 2, 0, 15);
        assert!(d.wave()[..6].iter().all(|&v| v == 0.0));
        let c = d.color();
        assert_eq!((c[0], c[1]), (0.5, 0.5));
        assert!((c[2] - 0.4).abs() < 1e-6);
        assert!(c[3] < 1e-6);
        assert_eq!(c[4], 0.0);
        let n = d.neighborhood();
        assert_eq!(n[0], 0.0);
        assert!(n[1].abs() < 1e-12);
        assert_eq!(n[2], n[3]);
    }

    #[test]
    fn checkerboard_statistics() {
        let img = ColorImage::from_gray(ImagePlane::<f64>::from_fn(16, 16, |x, y| {
            ((x + y) % 2) as f64
        }));
        let d = describe(&img, 2, 5, 6);
        // 3x3 window holds five of one value and four of the other
        let want_std = (20.0f64).sqrt() / 9.0;
        assert!((d.color()[3] as f64 - want_std).abs() < 1e-6);
        assert!((d.neighborhood()[0] as f64 - 2f64.sqrt()).abs() < 1e-6);
        assert_eq!(d.neighborhood()[2], 0.0);
        assert_eq!(d.neighborhood()[3], 1.0);
    }

    #[test]
    fn mirror_symmetric_positions_share_statistics() {
        let w = 16;
        let img = ColorImage::from_gray(ImagePlane::<f64>::from_fn(w, 16, |x, y| {
            let xm = x.min(w - 1 - x);
            ((xm * 13 + y * 7) % 10) as f64 / 9.0
        }));
        let a = describe(&img, 2, 3, 9);
        let b = describe(&img, 2, w - 1 - 3, 9);
        let (ca, cb) = (a.color(), b.color());
        for i in 2..6 {
            assert!((ca[i] - cb[i]).abs() < 1e-6, "color {i}");
        }
        let (na, nb) = (a.neighborhood(), b.neighborhood());
        for i in 0..4 {
            assert!((na[i] - nb[i]).abs() < 1e-6, "neigh {i}");
        }
    }

    #[test]
    fn out_of_bounds_and_geometry() {
        let img = ColorImage::from_gray(ImagePlane::<f64>::filled(8, 8, 0.1));
        let pyr = dwt2(&img.y, 1, WaveletFilter::Haar).unwrap();
        assert!(describe_pixel(&img, &pyr, 8, 0).is_err());
        let other = ColorImage::from_gray(ImagePlane::<f64>::filled(8, 10, 0.1));
        assert!(describe_pixel(&other, &pyr, 0, 0).is_err());
    }
}
