use crate::error::{Error, Result};
use crate::fr::DistortionMap;
use crate::scalar::Real;

/// Number of edges strictly below `y`.
#[inline]
pub fn quantize(y: f64, edges: &[f64]) -> u32 {
    edges.partition_point(|&e| e < y) as u32
}

pub fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "bin edges must be finite and strictly ascending: {edges:?}"
        )));
    }
    Ok(())
}

/// Regression targets and strata for every pixel of a map. Targets are
/// rounded to `f32` (the storage precision) before binning.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelLabels {
    pub y: Vec<f32>,
    pub bin: Vec<u32>,
}

pub fn label_pixels<T: Real>(map: &DistortionMap<T>, edges: &[f64]) -> Result<PixelLabels> {
    check_edges(edges)?;
    let y: Vec<f32> = map
        .values()
        .iter()
        .map(|v| v.to_f32().unwrap_or(f32::NAN))
        .collect();
    let bin = y.iter().map(|&v| quantize(v as f64, edges)).collect();
    Ok(PixelLabels { y, bin })
}

/// `k - 1` strictly ascending edges splitting `values` into `k` nearly equal
/// groups. Tied quantiles collapse, so fewer edges may come back.
pub fn quantile_edges(values: &[f64], k: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(k.saturating_sub(1));
    for i in 1..k {
        let idx = i * n / k;
        if idx == 0 {
            continue;
        }
        let e = sorted[idx - 1];
        if edges.last().is_none_or(|&last| e > last) {
            edges.push(e);
        }
    }
    // An edge at the maximum would leave its upper bin empty by construction.
    while edges.last().is_some_and(|&e| Some(&e) == sorted.last()) {
        edges.pop();
    }
    edges
}
