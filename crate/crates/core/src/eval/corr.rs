use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::ImagePlane;
use crate::scalar::Real;

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need n >= 3, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite input".into()));
    }
    Ok(())
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson linear correlation.
pub fn plcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson_unchecked(x, y)
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && v[idx[j]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Spearman rank-order correlation (Pearson of average ranks).
pub fn srocc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson_unchecked(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapComparison {
    /// `None` when either map is constant.
    pub pearson: Option<f64>,
    pub mae: f64,
}

impl MapComparison {
    pub fn pearson(&self) -> Result<f64> {
        self.pearson
            .ok_or_else(|| Error::UndefinedCorrelation("constant map".into()))
    }
}

/// Pixelwise Pearson correlation and mean absolute error of two maps.
pub fn map_compare<T: Real>(a: &ImagePlane<T>, b: &ImagePlane<T>) -> Result<MapComparison> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let av: Vec<f64> = a.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    let bv: Vec<f64> = b.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    let mae = av.iter().zip(&bv).map(|(p, q)| (p - q).abs()).sum::<f64>() / av.len() as f64;
    let pearson = if av.len() >= 2 {
        pearson_unchecked(&av, &bv).ok()
    } else {
        None
    };
    Ok(MapComparison { pearson, mae })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(srocc(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(srocc(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        let tie = srocc(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((tie - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((plcc(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        let x = [0.0, 1.0, 2.5, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((plcc(&x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            plcc(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(srocc(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(srocc(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn map_comparisons() {
        let a = ImagePlane::new(2, 2, vec![0.0, 1.0, 2.0, 5.0]).unwrap();
        let b = a.map(|v| 2.0 * v);
        let same = map_compare(&a, &a).unwrap();
        assert_eq!((same.pearson, same.mae), (Some(1.0), 0.0));
        let doubled = map_compare(&a, &b).unwrap();
        assert!((doubled.pearson.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(doubled.mae, a.mean());
        let c = ImagePlane::filled(2, 2, 1.0);
        let flat = map_compare(&a, &c).unwrap();
        assert!(flat.pearson().is_err() && flat.mae.is_finite());
        assert!(map_compare(&a, &ImagePlane::<f64>::zeros(3, 2)).is_err());
    }
}
