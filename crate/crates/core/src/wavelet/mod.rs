//! Separable orthonormal 2D wavelet analysis and per-pixel wave-vectors.
//!
//! A pixel `(x, y)` is covered, at level `j`, by the coefficient
//! `(x >> j, y >> j)` of each of the three detail bands, and by
//! `(x >> L, y >> L)` of the final approximation. Collecting those gives a
//! vector of `M = 3L + 1` values, ordered fine to coarse with the three
//! orientations of a level adjacent.

mod filter;
mod pyramid;

pub use filter::WaveletFilter;
pub use pyramid::{
    check_levels, default_levels, dwt2, idwt2, DetailBands, WaveVector, WaveletConfig,
    WaveletPyramid,
};
