use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Orthonormal wavelet families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFilter {
    #[default]
    Haar,
    Db2,
}

impl WaveletFilter {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveletFilter::Haar => "haar",
            WaveletFilter::Db2 => "db2",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            WaveletFilter::Haar => 0,
            WaveletFilter::Db2 => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(WaveletFilter::Haar),
            1 => Some(WaveletFilter::Db2),
            _ => None,
        }
    }

    /// Analysis lowpass taps.
    pub fn lowpass<T: Real>(self) -> Vec<T> {
        match self {
            WaveletFilter::Haar => {
                let r = T::FRAC_1_SQRT_2();
                vec![r, r]
            }
            WaveletFilter::Db2 => {
                let s3 = T::lit(3.0).sqrt();
                let one = T::one();
                let three = T::lit(3.0);
                let norm = T::lit(4.0) * T::SQRT_2();
                vec![one + s3, three + s3, three - s3, one - s3]
                    .into_iter()
                    .map(|c| c / norm)
                    .collect()
            }
        }
    }

    /// Quadrature mirror highpass, `g[k] = (-1)^k h[n-1-k]`.
    pub fn highpass<T: Real>(self) -> Vec<T> {
        let h = self.lowpass::<T>();
        let n = h.len();
        (0..n)
            .map(|k| {
                if k % 2 == 0 {
                    h[n - 1 - k]
                } else {
                    -h[n - 1 - k]
                }
            })
            .collect()
    }

    /// Gain of the 2D approximation band on a constant image, per level.
    pub fn dc_gain<T: Real>(self) -> T {
        let s: T = self.lowpass::<T>().into_iter().sum();
        s * s
    }
}

impl fmt::Display for WaveletFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WaveletFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(WaveletFilter::Haar),
            "db2" => Ok(WaveletFilter::Db2),
            other => Err(Error::InvalidConfig(format!(
                "unknown wavelet filter `{other}` (expected haar or db2)"
            ))),
        }
    }
}

/// One analysis step along a line. Odd lengths are first extended by one
/// mirrored sample; the even-length signal is then transformed with
/// periodic wrap-around.
pub(crate) fn analyze_line<T: Real>(input: &[T], lo: &mut [T], hi: &mut [T], h: &[T], g: &[T]) {
    let n = input.len();
    let even = n + (n & 1);
    let half = even / 2;
    debug_assert_eq!(lo.len(), half);
    debug_assert_eq!(hi.len(), half);
    let at = |i: usize| {
        let i = i % even;
        if i < n {
            input[i]
        } else {
            input[n - 1]
        }
    };
    for i in 0..half {
        let (mut a, mut d) = (T::zero(), T::zero());
        for k in 0..h.len() {
            let x = at(2 * i + k);
            a += h[k] * x;
            d += g[k] * x;
        }
        lo[i] = a;
        hi[i] = d;
    }
}

/// Inverse of [`analyze_line`]; writes the first `out.len()` samples.
pub(crate) fn synthesize_line<T: Real>(lo: &[T], hi: &[T], out: &mut [T], h: &[T], g: &[T]) {
    let half = lo.len();
    let even = 2 * half;
    let mut buf = vec![T::zero(); even];
    for i in 0..half {
        for k in 0..h.len() {
            buf[(2 * i + k) % even] += h[k] * lo[i] + g[k] * hi[i];
        }
    }
    let n = out.len();
    out.copy_from_slice(&buf[..n]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db2_taps_are_orthonormal() {
        let h = WaveletFilter::Db2.lowpass::<f64>();
        let g = WaveletFilter::Db2.highpass::<f64>();
        let dot = |a: &[f64], b: &[f64], s: usize| {
            a.iter().skip(s).zip(b).map(|(x, y)| x * y).sum::<f64>()
        };
        assert!((dot(&h, &h, 0) - 1.0).abs() < 1e-15);
        assert!(dot(&h, &h, 2).abs() < 1e-15);
        assert!(dot(&h, &g, 0).abs() < 1e-15);
        assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn haar_pair() {
        let h = WaveletFilter::Haar.lowpass::<f64>();
        let g = WaveletFilter::Haar.highpass::<f64>();
        let (mut lo, mut hi) = ([0.0], [0.0]);
        analyze_line(&[4.0, 2.0], &mut lo, &mut hi, &h, &g);
        assert!((lo[0] - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((hi[0] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn line_round_trip_odd_and_even() {
        for filter in [WaveletFilter::Haar, WaveletFilter::Db2] {
            let h = filter.lowpass::<f64>();
            let g = filter.highpass::<f64>();
            for n in [2usize, 3, 5, 8, 9] {
                let x: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64).sin()).collect();
                let half = n.div_ceil(2);
                let (mut lo, mut hi) = (vec![0.0; half], vec![0.0; half]);
                analyze_line(&x, &mut lo, &mut hi, &h, &g);
                let mut y = vec![0.0; n];
                synthesize_line(&lo, &hi, &mut y, &h, &g);
                for (a, b) in x.iter().zip(&y) {
                    assert!((a - b).abs() < 1e-12, "{filter} n={n}");
                }
            }
        }
    }
}
