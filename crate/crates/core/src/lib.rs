//! Wavelet-domain full-reference image quality assessment (WEQA) and a
//! two-stage blind predictor trained on its distortion maps.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the common `f64` instantiation.

pub mod descriptors;
pub mod error;
pub mod eval;
pub mod fr;
pub mod imgio;
pub mod learn;
pub mod linalg;
pub mod nr;
pub mod scalar;
pub mod wavelet;

pub use error::{Error, Result};
pub use scalar::Real;

/// Independent child seed for item `index` of a seeded run (splitmix64
/// finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub type Plane = imgio::ImagePlane<f64>;
pub type Image = imgio::ColorImage<f64>;
pub type Pyramid = wavelet::WaveletPyramid<f64>;
pub type Map = fr::DistortionMap<f64>;
pub type Coupling = fr::CouplingMatrix<f64>;

pub type PlaneF32 = imgio::ImagePlane<f32>;
pub type ImageF32 = imgio::ColorImage<f32>;
pub type PyramidF32 = wavelet::WaveletPyramid<f32>;
pub type MapF32 = fr::DistortionMap<f32>;
pub type CouplingF32 = fr::CouplingMatrix<f32>;
