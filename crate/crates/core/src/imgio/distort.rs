//! Synthetic distortions with five fixed severity levels.
//!
//! | kind            | parameter                    | level 1..5                  |
//! |-----------------|------------------------------|-----------------------------|
//! | gaussian_noise  | sigma (x 1/255)              | 2, 5, 10, 15, 25            |
//! | gaussian_blur   | sigma (pixels)               | 0.8, 1.2, 1.8, 2.6, 3.6     |
//! | jpeg_blocking   | quantizer scale              | 1, 2, 4, 8, 16              |
//! | contrast_change | gain                         | 0.9, 0.75, 0.6, 0.45, 0.3   |
//! | salt_pepper     | impulse density              | 0.002, 0.005, 0.01, 0.02, 0.05 |
//!
//! Random distortions draw from a ChaCha8 stream seeded by `seed`, and the
//! draw sequence does not depend on the level, so one seed yields nested
//! realizations across levels.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::plane::{ColorImage, ImagePlane};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const LEVELS: std::ops::RangeInclusive<u32> = 1..=5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionKind {
    GaussianNoise,
    GaussianBlur,
    JpegBlocking,
    ContrastChange,
    SaltPepper,
}

impl DistortionKind {
    pub const ALL: [DistortionKind; 5] = [
        DistortionKind::GaussianNoise,
        DistortionKind::GaussianBlur,
        DistortionKind::JpegBlocking,
        DistortionKind::ContrastChange,
        DistortionKind::SaltPepper,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistortionKind::GaussianNoise => "gaussian_noise",
            DistortionKind::GaussianBlur => "gaussian_blur",
            DistortionKind::JpegBlocking => "jpeg_blocking",
            DistortionKind::ContrastChange => "contrast_change",
            DistortionKind::SaltPepper => "salt_pepper",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// The severity parameter for `level` (see the module table).
    pub fn parameter(self, level: u32) -> Result<f64> {
        if !LEVELS.contains(&level) {
            return Err(Error::LevelOutOfRange(level));
        }
        let table: [f64; 5] = match self {
            DistortionKind::GaussianNoise => [2.0, 5.0, 10.0, 15.0, 25.0].map(|s| s / 255.0),
            DistortionKind::GaussianBlur => [0.8, 1.2, 1.8, 2.6, 3.6],
            DistortionKind::JpegBlocking => [1.0, 2.0, 4.0, 8.0, 16.0],
            DistortionKind::ContrastChange => [0.9, 0.75, 0.6, 0.45, 0.3],
            DistortionKind::SaltPepper => [0.002, 0.005, 0.01, 0.02, 0.05],
        };
        Ok(table[level as usize - 1])
    }
}

impl fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistortionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownDistortion(s.to_string()))
    }
}

pub fn apply_distortion<T: Real>(
    img: &ColorImage<T>,
    kind: DistortionKind,
    level: u32,
    seed: u64,
) -> Result<ColorImage<T>> {
    let param = kind.parameter(level)?;
    let mut planes = img.planes().map(to_f64);
    let (w, h) = img.dims();
    match kind {
        DistortionKind::GaussianNoise => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for p in &mut planes {
                for v in p.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += param * z;
                }
            }
        }
        DistortionKind::GaussianBlur => {
            let kernel = gaussian_kernel(param);
            for p in &mut planes {
                *p = convolve_separable(p, w, h, &kernel);
            }
        }
        DistortionKind::JpegBlocking => {
            planes[0] = dct_quantize(&planes[0], w, h, &LUMA_QUANT, param);
            planes[1] = dct_quantize(&planes[1], w, h, &CHROMA_QUANT, param);
            planes[2] = dct_quantize(&planes[2], w, h, &CHROMA_QUANT, param);
        }
        DistortionKind::ContrastChange => {
            let mean = planes[0].iter().sum::<f64>() / planes[0].len() as f64;
            for v in planes[0].iter_mut() {
                *v = mean + param * (*v - mean);
            }
            for p in &mut planes[1..] {
                for v in p.iter_mut() {
                    *v = 0.5 + param * (*v - 0.5);
                }
            }
        }
        DistortionKind::SaltPepper => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let [y, cb, cr] = &mut planes;
            for ((vy, vb), vr) in y.iter_mut().zip(cb.iter_mut()).zip(cr.iter_mut()) {
                let hit: f64 = rng.random();
                let salt: bool = rng.random();
                if hit < param {
                    *vy = if salt { 1.0 } else { 0.0 };
                    *vb = 0.5;
                    *vr = 0.5;
                }
            }
        }
    }
    let [y, cb, cr] = planes.map(|p| {
        let mut plane = ImagePlane::new(w, h, p.into_iter().map(T::lit).collect())
            .expect("dimensions preserved");
        plane.clamp_unit();
        plane
    });
    ColorImage::new(y, cb, cr)
}

fn to_f64<T: Real>(p: &ImagePlane<T>) -> Vec<f64> {
    p.as_slice().iter().map(|v| v.to_f64_lossy()).collect()
}

/// Normalized 1D Gaussian taps with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable convolution with edge replication.
pub(crate) fn convolve_separable(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &c)| c * src[y * w + clamp(x as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &c)| c * tmp[clamp(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

// Standard JPEG (Annex K) quantization tables, row-major.
const LUMA_QUANT: [f64; 64] = [
    16., 11., 10., 16., 24., 40., 51., 61., 12., 12., 14., 19., 26., 58., 60., 55., 14., 13., 16.,
    24., 40., 57., 69., 56., 14., 17., 22., 29., 51., 87., 80., 62., 18., 22., 37., 56., 68., 109.,
    103., 77., 24., 35., 55., 64., 81., 104., 113., 92., 49., 64., 78., 87., 103., 121., 120.,
    101., 72., 92., 95., 98., 112., 100., 103., 99.,
];

const CHROMA_QUANT: [f64; 64] = [
    17., 18., 24., 47., 99., 99., 99., 99., 18., 21., 26., 66., 99., 99., 99., 99., 24., 26., 56.,
    99., 99., 99., 99., 99., 47., 66., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99.,
    99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99., 99.,
    99., 99., 99., 99., 99., 99., 99.,
];

fn dct_basis() -> [[f64; 8]; 8] {
    let mut b = [[0.0; 8]; 8];
    for (u, row) in b.iter_mut().enumerate() {
        let cu = if u == 0 {
            (1.0f64 / 8.0).sqrt()
        } else {
            0.25f64.sqrt()
        };
        for (x, v) in row.iter_mut().enumerate() {
            *v = cu * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    b
}

/// 8x8 block DCT quantization on the 0..255 scale; partial edge blocks are
/// padded by edge replication.
fn dct_quantize(src: &[f64], w: usize, h: usize, table: &[f64; 64], scale: f64) -> Vec<f64> {
    let basis = dct_basis();
    let mut out = src.to_vec();
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            let mut block = [[0.0; 8]; 8];
            for (j, row) in block.iter_mut().enumerate() {
                for (i, v) in row.iter_mut().enumerate() {
                    let x = (bx + i).min(w - 1);
                    let y = (by + j).min(h - 1);
                    *v = src[y * w + x] * 255.0 - 128.0;
                }
            }
            // forward: C = B X B^T
            let mut coef = [[0.0; 8]; 8];
            for u in 0..8 {
                for v in 0..8 {
                    let mut s = 0.0;
                    for (y, row) in block.iter().enumerate() {
                        for (x, &px) in row.iter().enumerate() {
                            s += basis[v][y] * basis[u][x] * px;
                        }
                    }
                    let q = (table[v * 8 + u] * scale).max(1.0);
                    coef[v][u] = (s / q).round() * q;
                }
            }
            for j in 0..8 {
                let y = by + j;
                if y >= h {
                    break;
                }
                for i in 0..8 {
                    let x = bx + i;
                    if x >= w {
                        break;
                    }
                    let mut s = 0.0;
                    for (v, crow) in coef.iter().enumerate() {
                        for (u, &c) in crow.iter().enumerate() {
                            s += basis[v][j] * basis[u][i] * c;
                        }
                    }
                    out[y * w + x] = (s + 128.0) / 255.0;
                }
            }
        }
    }
    out
}
