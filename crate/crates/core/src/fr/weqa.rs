use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coupling::{coupling_matrix_with_sigma, CouplingMatrix};
use super::map::DistortionMap;
use crate::error::{Error, Result};
use crate::imgio::{ColorImage, ImagePlane};
use crate::scalar::Real;
use crate::wavelet::{dwt2, WaveVector, WaveletConfig, WaveletPyramid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrConfig {
    pub wavelet: WaveletConfig,
    pub g_sigma: f64,
}

impl Default for FrConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletConfig::default(),
            g_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrResult<T> {
    pub map: DistortionMap<T>,
    pub mean_distortion: T,
    pub o_score: T,
    pub levels: usize,
}

/// `Q = 1 / (1 + mean)`.
#[inline]
pub fn pool_score<T: Real>(mean_distortion: T) -> T {
    T::one() / (T::one() + mean_distortion)
}

/// Anisotropic distance `sqrt(delta^T g delta)` with `delta = phi - phi'`.
pub fn weqa_distance<T: Real>(
    phi: &WaveVector<T>,
    phi_prime: &WaveVector<T>,
    g: &CouplingMatrix<T>,
) -> Result<T> {
    let m = g.order();
    for v in [phi, phi_prime] {
        if v.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: v.len(),
            });
        }
    }
    let delta: Vec<T> = phi
        .components()
        .iter()
        .zip(phi_prime.components())
        .map(|(a, b)| *a - *b)
        .collect();
    Ok(g.quadratic_form(&delta).sqrt())
}

/// Per-pixel distance between two pyramids of the same geometry.
pub fn weqa_map<T: Real>(
    reference: &WaveletPyramid<T>,
    distorted: &WaveletPyramid<T>,
    g: &CouplingMatrix<T>,
) -> Result<DistortionMap<T>> {
    let (w, h) = (reference.width(), reference.height());
    if (distorted.width(), distorted.height()) != (w, h)
        || distorted.levels() != reference.levels()
        || distorted.filter() != reference.filter()
    {
        return Err(Error::DimensionMismatch(format!(
            "pyramids {}x{} L={} {} vs {}x{} L={} {}",
            w,
            h,
            reference.levels(),
            reference.filter(),
            distorted.width(),
            distorted.height(),
            distorted.levels(),
            distorted.filter()
        )));
    }
    let m = reference.vector_len();
    if g.order() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: g.order(),
        });
    }
    let mut data = vec![T::zero(); w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let mut a = vec![T::zero(); m];
        let mut b = vec![T::zero(); m];
        for (x, out) in row.iter_mut().enumerate() {
            reference.wave_vector_into(x, y, &mut a);
            distorted.wave_vector_into(x, y, &mut b);
            for (ai, bi) in a.iter_mut().zip(&b) {
                *ai -= *bi;
            }
            *out = g.quadratic_form(&a).max(T::zero()).sqrt();
        }
    });
    DistortionMap::new(ImagePlane::new(w, h, data)?)
}

/// WEQA on the luma planes: distortion map, mean distortion and O-score.
pub fn weqa_assess<T: Real>(
    reference: &ColorImage<T>,
    distorted: &ColorImage<T>,
    config: &FrConfig,
) -> Result<FrResult<T>> {
    weqa_assess_planes(&reference.y, &distorted.y, config)
}

pub fn weqa_assess_planes<T: Real>(
    reference: &ImagePlane<T>,
    distorted: &ImagePlane<T>,
    config: &FrConfig,
) -> Result<FrResult<T>> {
    if !reference.same_dims(distorted) {
        return Err(Error::DimensionMismatch(format!(
            "reference {:?} vs distorted {:?}",
            reference.dims(),
            distorted.dims()
        )));
    }
    let (w, h) = reference.dims();
    let levels = config.wavelet.levels_for(w, h);
    let pr = dwt2(reference, levels, config.wavelet.filter)?;
    let pd = dwt2(distorted, levels, config.wavelet.filter)?;
    let g = coupling_matrix_with_sigma::<T>(pr.vector_len(), config.g_sigma)?;
    let map = weqa_map(&pr, &pd, &g)?;
    let mean_distortion = map.mean();
    Ok(FrResult {
        map,
        mean_distortion,
        o_score: pool_score(mean_distortion),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fr::coupling_matrix;
    use crate::wavelet::WaveletFilter;

    fn wv(v: &[f64]) -> WaveVector<f64> {
        WaveVector(v.to_vec())
    }

    #[test]
    fn distance_examples() {
        let g = coupling_matrix::<f64>(2).unwrap();
        assert_eq!(
            weqa_distance(&wv(&[0.3, -2.0]), &wv(&[0.3, -2.0]), &g).unwrap(),
            0.0
        );
        let d = weqa_distance(&wv(&[1.0, 0.0]), &wv(&[0.0, 0.0]), &g).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = weqa_distance(&wv(&[1.0, 0.0]), &wv(&[0.0, 1.0]), &g).unwrap();
        let want = 2.0 - 2.0 * (-0.5f64).exp();
        assert!((d * d - want).abs() < 1e-12);
        assert!((d * d - 0.786939).abs() < 1e-6);
        assert!(d * d < 2.0);
    }

    #[test]
    fn length_mismatch() {
        let g = coupling_matrix::<f64>(3).unwrap();
        assert!(matches!(
            weqa_distance(&wv(&[1.0, 0.0]), &wv(&[0.0, 0.0]), &g),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn identical_images_score_one() {
        let p = ImagePlane::<f64>::from_fn(32, 32, |x, y| ((x * y) % 7) as f64 / 7.0);
        let img = ColorImage::from_gray(p);
        let r = weqa_assess(&img, &img, &FrConfig::default()).unwrap();
        assert!(r.map.values().iter().all(|&v| v == 0.0));
        assert_eq!(r.mean_distortion, 0.0);
        assert_eq!(r.o_score, 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = ColorImage::from_gray(ImagePlane::<f64>::zeros(16, 16));
        let b = ColorImage::from_gray(ImagePlane::<f64>::zeros(16, 8));
        assert!(matches!(
            weqa_assess(&a, &b, &FrConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn impulse_is_confined_to_its_dyadic_block() {
        let (w, h, levels) = (32usize, 32usize, 3usize);
        let (px, py) = (13usize, 21usize);
        let r = ImagePlane::<f64>::filled(w, h, 0.5);
        let mut d = r.clone();
        d.set(px, py, 0.9);
        let cfg = FrConfig {
            wavelet: WaveletConfig {
                filter: WaveletFilter::Haar,
                levels: Some(levels),
            },
            g_sigma: 1.0,
        };
        let res = weqa_assess_planes(&r, &d, &cfg).unwrap();
        let block = 1 << levels;
        let peak = res.map.get(px, py);
        assert!(peak > 0.0);
        for y in 0..h {
            for x in 0..w {
                let v = res.map.get(x, y);
                if x / block == px / block && y / block == py / block {
                    assert!(v > 0.0);
                    assert!(v <= peak + 1e-12);
                } else {
                    assert_eq!(v, 0.0, "({x},{y})");
                }
            }
        }
        // the 2x2 block sharing every coefficient with the impulse attains the peak
        assert_eq!(res.map.get(px ^ 1, py), peak);
    }

    #[test]
    fn score_pooling() {
        assert_eq!(pool_score(0.0f64), 1.0);
        assert!(pool_score(0.5f64) > pool_score(0.7f64));
    }
}
