use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Design, Tree, TreeParams, LEAF_MARKER};
use crate::descriptors::{LabeledSample, TrainingSet};
use crate::error::{Error, Result};
use crate::imgio::DistortionKind;
use crate::wavelet::WaveletFilter;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(F))`.
    pub k_candidates: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            k_candidates: None,
            min_leaf: 5,
            max_depth: 20,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self, feature_dim: usize) -> Result<usize> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig(
                "forest needs at least one tree".into(),
            ));
        }
        if self.n_trees > u32::MAX as usize {
            return Err(Error::InvalidConfig("too many trees".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidConfig("min_leaf must be >= 1".into()));
        }
        if feature_dim == 0 || feature_dim >= LEAF_MARKER as usize {
            return Err(Error::InvalidConfig(format!(
                "unsupported feature dimension {feature_dim}"
            )));
        }
        let k = self
            .k_candidates
            .unwrap_or_else(|| (feature_dim as f64).sqrt().ceil() as usize);
        if k == 0 || k > feature_dim {
            return Err(Error::InvalidConfig(format!(
                "k_candidates {k} outside 1..={feature_dim}"
            )));
        }
        Ok(k)
    }
}

/// Descriptor layout and normalization a forest was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorMeta {
    pub feature_dim: usize,
    /// Wave-vector length `M`; zero for forests trained on arbitrary features.
    pub vector_len: usize,
    pub levels: usize,
    pub filter: WaveletFilter,
    pub g_sigma: f64,
    pub edges: Vec<f64>,
    pub kind: Option<DistortionKind>,
    pub means: Vec<f32>,
    pub stds: Vec<f32>,
}

impl DescriptorMeta {
    /// Layout for plain feature vectors with no image geometry attached.
    pub fn bare(feature_dim: usize) -> Self {
        Self {
            feature_dim,
            vector_len: 0,
            levels: 0,
            filter: WaveletFilter::Haar,
            g_sigma: 1.0,
            edges: Vec::new(),
            kind: None,
            means: vec![0.0; feature_dim],
            stds: vec![1.0; feature_dim],
        }
    }

    pub fn describes_images(&self) -> bool {
        self.levels > 0
    }

    #[inline]
    pub fn standardize_into(&self, x: &[f32], out: &mut [f32]) {
        for ((o, &v), (&m, &s)) in out.iter_mut().zip(x).zip(self.means.iter().zip(&self.stds)) {
            *o = (v - m) / s;
        }
    }
}

impl std::fmt::Display for DescriptorMeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "F={} M={} L={} filter={} g_sigma={}",
            self.feature_dim, self.vector_len, self.levels, self.filter, self.g_sigma
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub meta: DescriptorMeta,
    pub trees: Vec<Tree>,
}

fn canonical_order(samples: &[LabeledSample]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&samples[a], &samples[b]);
        sa.x.iter()
            .zip(&sb.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(sa.y.total_cmp(&sb.y))
    });
    order
}

/// Train on a sampled set, carrying its descriptor layout into the model.
pub fn train_forest_set(set: &TrainingSet, config: &ForestConfig) -> Result<ForestModel> {
    let m = &set.meta;
    let mut meta = DescriptorMeta::bare(m.feature_dim);
    meta.vector_len = m.vector_len;
    meta.levels = m.levels;
    meta.filter = m.filter;
    meta.g_sigma = m.g_sigma;
    meta.edges = m.edges.clone();
    meta.kind = m.kind;
    train_forest_with_meta(&set.samples, config, meta)
}

/// Train on plain feature vectors.
pub fn train_forest(samples: &[LabeledSample], config: &ForestConfig) -> Result<ForestModel> {
    let f = samples.first().ok_or(Error::EmptySamples)?.x.len();
    train_forest_with_meta(samples, config, DescriptorMeta::bare(f))
}

/// Train an Extra-Trees ensemble. Samples are put in a canonical order
/// first, so the model does not depend on the order they are given in.
/// Tree `t` draws from a ChaCha8 stream `t` keyed by the seed.
pub fn train_forest_with_meta(
    samples: &[LabeledSample],
    config: &ForestConfig,
    mut meta: DescriptorMeta,
) -> Result<ForestModel> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let f = meta.feature_dim;
    let k = config.validate(f)?;
    if samples.len() < 2 * config.min_leaf {
        return Err(Error::InvalidConfig(format!(
            "{} samples, need at least 2 * min_leaf = {}",
            samples.len(),
            2 * config.min_leaf
        )));
    }
    for s in samples {
        if s.x.len() != f {
            return Err(Error::LengthMismatch {
                expected: f,
                got: s.x.len(),
            });
        }
        if !s.y.is_finite() || s.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite sample".into()));
        }
    }

    let order = canonical_order(samples);
    let n = samples.len();
    let mut means = vec![0.0f64; f];
    for &i in &order {
        for (m, &v) in means.iter_mut().zip(&samples[i].x) {
            *m += v as f64;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut vars = vec![0.0f64; f];
    for &i in &order {
        for ((s, &v), m) in vars.iter_mut().zip(&samples[i].x).zip(&means) {
            *s += (v as f64 - m).powi(2);
        }
    }
    meta.means = means.iter().map(|&m| m as f32).collect();
    meta.stds = vars
        .iter()
        .map(|&v| {
            let s = (v / n as f64).sqrt() as f32;
            if s > 0.0 && s.is_finite() {
                s
            } else {
                1.0
            }
        })
        .collect();

    let mut x = vec![0.0f32; n * f];
    let mut y = Vec::with_capacity(n);
    for (row, &i) in x.chunks_exact_mut(f).zip(&order) {
        meta.standardize_into(&samples[i].x, row);
        y.push(samples[i].y);
    }
    let varying = (0..f).any(|j| {
        let first = x[j];
        x.chunks_exact(f).any(|r| r[j] != first)
    });
    if !varying {
        log::warn!("all {f} features are constant; trees reduce to single leaves");
    }

    let data = Design {
        x: &x,
        y: &y,
        dim: f,
    };
    let params = TreeParams {
        k_candidates: k,
        min_leaf: config.min_leaf,
        max_depth: config.max_depth,
    };
    let trees: Vec<Tree> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            grow(&data, params, &mut rng)
        })
        .collect();
    let mut config = config.clone();
    config.k_candidates = Some(k);
    Ok(ForestModel {
        config,
        meta,
        trees,
    })
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.meta.feature_dim
    }

    fn check_dim(&self, x: &[f32]) -> Result<()> {
        if x.len() != self.meta.feature_dim {
            return Err(Error::LengthMismatch {
                expected: self.meta.feature_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Prediction for an already standardized descriptor. `leaves` is
    /// scratch space; values are summed in sorted order so the result does
    /// not depend on tree order.
    #[inline]
    pub fn predict_standardized(&self, z: &[f32], leaves: &mut Vec<f32>) -> f64 {
        leaves.clear();
        leaves.extend(self.trees.iter().map(|t| t.leaf(z).0));
        leaves.sort_unstable_by(f32::total_cmp);
        let sum: f64 = leaves.iter().map(|&v| v as f64).sum();
        (sum / leaves.len() as f64).max(0.0)
    }

    pub fn predict(&self, x: &[f32]) -> Result<f64> {
        self.check_dim(x)?;
        let mut z = vec![0.0; x.len()];
        self.meta.standardize_into(x, &mut z);
        Ok(self.predict_standardized(&z, &mut Vec::with_capacity(self.trees.len())))
    }

    pub fn signature_standardized_into(&self, z: &[f32], out: &mut Vec<u32>) {
        out.clear();
        out.extend(self.trees.iter().map(|t| t.leaf(z).1));
    }

    pub fn leaf_signature(&self, x: &[f32]) -> Result<Vec<u32>> {
        self.check_dim(x)?;
        let mut z = vec![0.0; x.len()];
        self.meta.standardize_into(x, &mut z);
        let mut out = Vec::with_capacity(self.trees.len());
        self.signature_standardized_into(&z, &mut out);
        Ok(out)
    }

    pub fn kernel(&self, x1: &[f32], x2: &[f32]) -> Result<f64> {
        let a = self.leaf_signature(x1)?;
        let b = self.leaf_signature(x2)?;
        let agree = a.iter().zip(&b).filter(|(p, q)| p == q).count();
        Ok(agree as f64 / a.len() as f64)
    }
}

/// Mean leaf value over the trees, clamped at zero.
pub fn predict_forest(model: &ForestModel, x: &[f32]) -> Result<f64> {
    model.predict(x)
}

/// Leaf id reached in each tree, in tree order.
pub fn leaf_signature(model: &ForestModel, x: &[f32]) -> Result<Vec<u32>> {
    model.leaf_signature(x)
}

/// Fraction of trees in which `x1` and `x2` share a leaf.
pub fn forest_kernel(model: &ForestModel, x1: &[f32], x2: &[f32]) -> Result<f64> {
    model.kernel(x1, x2)
}
