//! Full-reference assessment: the WEQA per-pixel wavelet distance and an SSIM
//! baseline.
//!
//! For pixel `p` with reference and distorted wave-vectors `phi` and `phi'`,
//! `d(p)^2 = sum_ij g_ij (phi_i - phi'_i)(phi_j - phi'_j)`, where `g` couples
//! nearby components with Gaussian weights. The map is pooled by its mean
//! `D`, and the objective score is `Q = 1 / (1 + D)`.

mod coupling;
mod map;
mod ssim;
mod weqa;

pub use coupling::{coupling_matrix, coupling_matrix_with_sigma, CouplingMatrix, MAX_ORDER};
pub use map::{DistortionMap, RAW_MAP_MAGIC};
pub use ssim::{ssim_assess, ssim_planes, SsimResult, SSIM_DYNAMIC_RANGE, SSIM_K1, SSIM_K2};
pub use weqa::{
    pool_score, weqa_assess, weqa_assess_planes, weqa_distance, weqa_map, FrConfig, FrResult,
};
