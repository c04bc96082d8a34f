use serde::{Deserialize, Serialize};

use super::filter::{analyze_line, synthesize_line, WaveletFilter};
use crate::error::{Error, Result};
use crate::imgio::ImagePlane;
use crate::scalar::Real;

/// Transform settings shared by the full-reference metric and the descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletConfig {
    pub filter: WaveletFilter,
    /// `None` selects [`default_levels`] for each image.
    pub levels: Option<usize>,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            filter: WaveletFilter::Haar,
            levels: None,
        }
    }
}

impl WaveletConfig {
    pub fn levels_for(&self, width: usize, height: usize) -> usize {
        self.levels.unwrap_or_else(|| default_levels(width, height))
    }
}

/// 4 levels when the short side is at least 64px, else `floor(log2(min)) - 1`
/// (never below 1).
pub fn default_levels(width: usize, height: usize) -> usize {
    let m = width.min(height);
    if m >= 64 {
        4
    } else {
        (m.max(1).ilog2() as usize).saturating_sub(1).max(1)
    }
}

pub fn check_levels(width: usize, height: usize, levels: usize) -> Result<()> {
    let needed = 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX);
    if levels == 0 || levels > 30 || width.min(height) < needed {
        return Err(Error::TooManyLevels {
            levels,
            needed,
            width,
            height,
        });
    }
    Ok(())
}

/// Detail subbands of one level. `h` is lowpass along x and highpass along y
/// (it responds to horizontal structures), `v` the converse, `d` highpass in
/// both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands<T> {
    pub h: ImagePlane<T>,
    pub v: ImagePlane<T>,
    pub d: ImagePlane<T>,
}

impl<T: Real> DetailBands<T> {
    pub fn bands(&self) -> [&ImagePlane<T>; 3] {
        [&self.h, &self.v, &self.d]
    }
}

/// L-level separable decomposition. `details[0]` is the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid<T> {
    filter: WaveletFilter,
    width: usize,
    height: usize,
    details: Vec<DetailBands<T>>,
    approx: ImagePlane<T>,
}

#[inline]
fn band_size(n: usize, level: usize) -> usize {
    n.div_ceil(1 << level)
}

impl<T: Real> WaveletPyramid<T> {
    /// Assemble a pyramid from its parts, checking the dyadic size contract.
    pub fn from_parts(
        filter: WaveletFilter,
        width: usize,
        height: usize,
        details: Vec<DetailBands<T>>,
        approx: ImagePlane<T>,
    ) -> Result<Self> {
        let levels = details.len();
        check_levels(width, height, levels)?;
        for (i, lvl) in details.iter().enumerate() {
            let want = (band_size(width, i + 1), band_size(height, i + 1));
            for band in lvl.bands() {
                if band.dims() != want {
                    return Err(Error::DimensionMismatch(format!(
                        "level {} subband is {:?}, expected {:?}",
                        i + 1,
                        band.dims(),
                        want
                    )));
                }
            }
        }
        let want = (band_size(width, levels), band_size(height, levels));
        if approx.dims() != want {
            return Err(Error::DimensionMismatch(format!(
                "approximation is {:?}, expected {:?}",
                approx.dims(),
                want
            )));
        }
        Ok(Self {
            filter,
            width,
            height,
            details,
            approx,
        })
    }

    pub fn filter(&self) -> WaveletFilter {
        self.filter
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Wave-vector length: three orientations per level plus the approximation.
    pub fn vector_len(&self) -> usize {
        3 * self.levels() + 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Detail bands at `level` in `1..=L`.
    pub fn level(&self, level: usize) -> &DetailBands<T> {
        &self.details[level - 1]
    }

    pub fn details(&self) -> &[DetailBands<T>] {
        &self.details
    }

    pub fn approx(&self) -> &ImagePlane<T> {
        &self.approx
    }

    pub fn details_mut(&mut self) -> &mut [DetailBands<T>] {
        &mut self.details
    }

    pub fn approx_mut(&mut self) -> &mut ImagePlane<T> {
        &mut self.approx
    }

    /// Sum of squares over every coefficient.
    pub fn energy(&self) -> T {
        self.details
            .iter()
            .flat_map(|l| l.bands())
            .map(|b| b.energy())
            .sum::<T>()
            + self.approx.energy()
    }

    /// Write the wave-vector of pixel `(x, y)` into `out` without bounds
    /// checks on the coordinate. Order: `H1 V1 D1 H2 V2 D2 ... HL VL DL AL`.
    #[inline]
    pub fn wave_vector_into(&self, x: usize, y: usize, out: &mut [T]) {
        debug_assert_eq!(out.len(), self.vector_len());
        for (j, lvl) in self.details.iter().enumerate() {
            let (bx, by) = (x >> (j + 1), y >> (j + 1));
            out[3 * j] = lvl.h.get(bx, by);
            out[3 * j + 1] = lvl.v.get(bx, by);
            out[3 * j + 2] = lvl.d.get(bx, by);
        }
        let l = self.levels();
        out[3 * l] = self.approx.get(x >> l, y >> l);
    }

    pub fn wave_vector_at(&self, x: usize, y: usize) -> Result<WaveVector<T>> {
        if x >= self.width || y >= self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let mut v = vec![T::zero(); self.vector_len()];
        self.wave_vector_into(x, y, &mut v);
        Ok(WaveVector(v))
    }
}

/// Per-pixel coefficient trace through the pyramid, fine to coarse.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector<T>(pub Vec<T>);

impl<T: Real> WaveVector<T> {
    pub fn components(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One 2D analysis step: rows, then columns. Returns `(A, H, V, D)`.
fn analyze_2d<T: Real>(
    src: &ImagePlane<T>,
    h: &[T],
    g: &[T],
) -> (ImagePlane<T>, ImagePlane<T>, ImagePlane<T>, ImagePlane<T>) {
    let (w, ht) = src.dims();
    let (hw, hh) = (w.div_ceil(2), ht.div_ceil(2));
    // row pass: lo | hi halves, each hw wide
    let mut row_lo = vec![T::zero(); hw * ht];
    let mut row_hi = vec![T::zero(); hw * ht];
    for y in 0..ht {
        analyze_line(
            src.row(y),
            &mut row_lo[y * hw..(y + 1) * hw],
            &mut row_hi[y * hw..(y + 1) * hw],
            h,
            g,
        );
    }
    let mut col = vec![T::zero(); ht];
    let mut lo = vec![T::zero(); hh];
    let mut hi = vec![T::zero(); hh];
    let mut column_pass = |rows: &[T]| {
        let mut low = vec![T::zero(); hw * hh];
        let mut high = vec![T::zero(); hw * hh];
        for x in 0..hw {
            for y in 0..ht {
                col[y] = rows[y * hw + x];
            }
            analyze_line(&col, &mut lo, &mut hi, h, g);
            for y in 0..hh {
                low[y * hw + x] = lo[y];
                high[y * hw + x] = hi[y];
            }
        }
        (
            ImagePlane::new(hw, hh, low).expect("sized"),
            ImagePlane::new(hw, hh, high).expect("sized"),
        )
    };
    let (a, hband) = column_pass(&row_lo);
    let (v, d) = column_pass(&row_hi);
    (a, hband, v, d)
}

fn synthesize_2d<T: Real>(
    a: &ImagePlane<T>,
    bands: &DetailBands<T>,
    w: usize,
    ht: usize,
    h: &[T],
    g: &[T],
) -> ImagePlane<T> {
    let (hw, hh) = a.dims();
    let mut col = vec![T::zero(); ht];
    let column_pass = |low: &ImagePlane<T>, high: &ImagePlane<T>, col: &mut Vec<T>| {
        let mut rows = vec![T::zero(); hw * ht];
        let mut lo = vec![T::zero(); hh];
        let mut hi = vec![T::zero(); hh];
        for x in 0..hw {
            for y in 0..hh {
                lo[y] = low.get(x, y);
                hi[y] = high.get(x, y);
            }
            synthesize_line(&lo, &hi, col, h, g);
            for y in 0..ht {
                rows[y * hw + x] = col[y];
            }
        }
        rows
    };
    let row_lo = column_pass(a, &bands.h, &mut col);
    let row_hi = column_pass(&bands.v, &bands.d, &mut col);
    let mut out = vec![T::zero(); w * ht];
    for y in 0..ht {
        synthesize_line(
            &row_lo[y * hw..(y + 1) * hw],
            &row_hi[y * hw..(y + 1) * hw],
            &mut out[y * w..(y + 1) * w],
            h,
            g,
        );
    }
    ImagePlane::new(w, ht, out).expect("sized")
}

/// Multi-level orthonormal 2D DWT.
pub fn dwt2<T: Real>(
    plane: &ImagePlane<T>,
    levels: usize,
    filter: WaveletFilter,
) -> Result<WaveletPyramid<T>> {
    let (width, height) = plane.dims();
    check_levels(width, height, levels)?;
    let h = filter.lowpass::<T>();
    let g = filter.highpass::<T>();
    let mut details = Vec::with_capacity(levels);
    let mut current = plane.clone();
    for _ in 0..levels {
        let (a, hb, vb, db) = analyze_2d(&current, &h, &g);
        details.push(DetailBands {
            h: hb,
            v: vb,
            d: db,
        });
        current = a;
    }
    Ok(WaveletPyramid {
        filter,
        width,
        height,
        details,
        approx: current,
    })
}

pub fn idwt2<T: Real>(pyr: &WaveletPyramid<T>) -> Result<ImagePlane<T>> {
    // Re-validate: the fields are public through the mutable accessors.
    let checked = WaveletPyramid::from_parts(
        pyr.filter,
        pyr.width,
        pyr.height,
        pyr.details.clone(),
        pyr.approx.clone(),
    )?;
    let h = checked.filter.lowpass::<T>();
    let g = checked.filter.highpass::<T>();
    let mut current = checked.approx;
    for (j, bands) in checked.details.iter().enumerate().rev() {
        let w = band_size(checked.width, j);
        let ht = band_size(checked.height, j);
        current = synthesize_2d(&current, bands, w, ht, &h, &g);
    }
    Ok(current)
}
