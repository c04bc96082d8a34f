//! Image-level forest kernel and the kernel ridge score regressor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};

/// Normalized per-tree leaf histograms of a set of pixel descriptors.
/// Each tree's histogram is sorted by leaf id and sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSignature {
    pub trees: Vec<Vec<(u32, f64)>>,
}

impl ImageSignature {
    /// Build from pixel leaf signatures (each of length `n_trees`).
    pub fn from_leaf_signatures<'a>(
        n_trees: usize,
        signatures: impl IntoIterator<Item = &'a [u32]>,
    ) -> Result<Self> {
        let mut per_tree: Vec<Vec<u32>> = vec![Vec::new(); n_trees];
        let mut count = 0usize;
        for sig in signatures {
            if sig.len() != n_trees {
                return Err(Error::LengthMismatch {
                    expected: n_trees,
                    got: sig.len(),
                });
            }
            for (t, &leaf) in sig.iter().enumerate() {
                per_tree[t].push(leaf);
            }
            count += 1;
        }
        if count == 0 || n_trees == 0 {
            return Err(Error::EmptySamples);
        }
        let trees = per_tree
            .into_iter()
            .map(|mut leaves| {
                leaves.sort_unstable();
                let mut hist: Vec<(u32, f64)> = Vec::new();
                for leaf in leaves {
                    match hist.last_mut() {
                        Some((id, c)) if *id == leaf => *c += 1.0,
                        _ => hist.push((leaf, 1.0)),
                    }
                }
                hist.iter_mut().for_each(|(_, c)| *c /= count as f64);
                hist
            })
            .collect();
        Ok(Self { trees })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean pixel-pair forest kernel between the two pixel sets.
    pub fn raw_kernel(&self, other: &Self) -> f64 {
        let mut total = 0.0;
        for (a, b) in self.trees.iter().zip(&other.trees) {
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].0.cmp(&b[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        total += a[i].1 * b[j].1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        total / self.trees.len() as f64
    }

    /// Cosine-normalized kernel in `[0, 1]`; exactly 1 against itself.
    pub fn kernel(&self, other: &Self) -> f64 {
        let ab = self.raw_kernel(other);
        let denom = (self.raw_kernel(self) * other.raw_kernel(other)).sqrt();
        if denom > 0.0 {
            (ab / denom).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    /// Id of the forest the support signatures were routed through.
    pub forest_id: String,
    pub lambda: f64,
    pub bias: f64,
    pub weights: Vec<f64>,
    pub support: Vec<ImageSignature>,
    /// Pixel stride used when the support signatures were computed.
    pub stride: usize,
}

impl KernelModel {
    pub fn predict(&self, sig: &ImageSignature) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(&self.support)
                .map(|(w, s)| w * sig.kernel(s))
                .sum::<f64>()
    }
}

/// Solve `(K + lambda I) a = y - mean(y)` for a row-major `n x n` Gram
/// matrix. Returns `(mean(y), a)`.
pub fn solve_kernel_ridge(
    gram: &[f64],
    n: usize,
    targets: &[f64],
    lambda: f64,
) -> Result<(f64, Vec<f64>)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if gram.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: gram.len(),
        });
    }
    if targets.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    let bias = targets.iter().sum::<f64>() / n as f64;
    let mut a = gram.to_vec();
    for i in 0..n {
        a[i * n + i] += lambda;
    }
    let l = cholesky(&a, n)?;
    let centered: Vec<f64> = targets.iter().map(|y| y - bias).collect();
    Ok((bias, cholesky_solve(&l, n, &centered)))
}

pub const MIN_SCORER_IMAGES: usize = 5;

/// Fit a kernel ridge regressor from image signatures to scores.
pub fn train_kernel_scorer(
    forest_id: &str,
    pairs: &[(ImageSignature, f64)],
    lambda: f64,
    stride: usize,
) -> Result<KernelModel> {
    if pairs.len() < MIN_SCORER_IMAGES {
        return Err(Error::InvalidConfig(format!(
            "kernel scorer needs at least {MIN_SCORER_IMAGES} images, got {}",
            pairs.len()
        )));
    }
    let t = pairs[0].0.n_trees();
    if let Some(bad) = pairs.iter().find(|(s, _)| s.n_trees() != t) {
        return Err(Error::LengthMismatch {
            expected: t,
            got: bad.0.n_trees(),
        });
    }
    if pairs.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::InvalidConfig("non-finite scorer target".into()));
    }
    let n = pairs.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = pairs[i].0.kernel(&pairs[j].0);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let targets: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (bias, weights) = solve_kernel_ridge(&gram, n, &targets, lambda)?;
    Ok(KernelModel {
        forest_id: forest_id.to_string(),
        lambda,
        bias,
        weights,
        support: pairs.iter().map(|p| p.0.clone()).collect(),
        stride: stride.max(1),
    })
}
