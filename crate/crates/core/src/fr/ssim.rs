//! Structural similarity with an 11x11 Gaussian window (sigma 1.5) on the
//! luma plane. The map keeps the image size; windows are clamped at the
//! borders.

use crate::error::{Error, Result};
use crate::imgio::{convolve_separable, ColorImage, ImagePlane};
use crate::scalar::Real;

pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_DYNAMIC_RANGE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SsimResult<T> {
    pub ssim_map: ImagePlane<T>,
    pub mean_ssim: T,
}

fn window() -> Vec<f64> {
    let sigma = 1.5f64;
    let mut k: Vec<f64> = (-5i32..=5)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

pub fn ssim_assess<T: Real>(
    reference: &ColorImage<T>,
    distorted: &ColorImage<T>,
) -> Result<SsimResult<T>> {
    ssim_planes(&reference.y, &distorted.y)
}

pub fn ssim_planes<T: Real>(a: &ImagePlane<T>, b: &ImagePlane<T>) -> Result<SsimResult<T>> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!(
            "reference {:?} vs distorted {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let (w, h) = a.dims();
    let x: Vec<f64> = a.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    let y: Vec<f64> = b.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    let k = window();
    let blur = |v: &[f64]| convolve_separable(v, w, h, &k);
    let sq = |v: &[f64]| v.iter().map(|t| t * t).collect::<Vec<_>>();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let (mx, my) = (blur(&x), blur(&y));
    let (exx, eyy, exy) = (blur(&sq(&x)), blur(&sq(&y)), blur(&xy));
    let c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE).powi(2);
    let map: Vec<T> = (0..w * h)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let sxx = exx[i] - ux * ux;
            let syy = eyy[i] - uy * uy;
            let sxy = exy[i] - ux * uy;
            let num = (2.0 * ux * uy + c1) * (2.0 * sxy + c2);
            let den = (ux * ux + uy * uy + c1) * (sxx + syy + c2);
            T::lit(num / den)
        })
        .collect();
    let mean = map.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / map.len() as f64;
    Ok(SsimResult {
        ssim_map: ImagePlane::new(w, h, map)?,
        mean_ssim: T::lit(mean),
    })
}
