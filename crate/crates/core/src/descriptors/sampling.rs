//! Stratified pixel selection and the manifest-level training-set builder.

use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labels::{check_edges, label_pixels, quantile_edges, quantize, PixelLabels};
use super::pixel::{describe_into, feature_dim};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::fr::{coupling_matrix_with_sigma, weqa_map, DistortionMap, FrConfig};
use crate::imgio::{load_image, ColorImage, DatasetManifest, DistortionKind};
use crate::scalar::Real;
use crate::wavelet::{check_levels, dwt2, WaveletFilter, WaveletPyramid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPolicy {
    /// Samples drawn per image (upper bound).
    pub per_image: usize,
    /// Number of strata when edges are derived from the data.
    pub strata: usize,
    pub seed: u64,
    /// Fixed stratum edges; `None` derives them from pooled quantiles of all
    /// maps in the run.
    pub edges: Option<Vec<f64>>,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        Self {
            per_image: 2000,
            strata: 4,
            seed: 0,
            edges: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Vec<f32>,
    pub y: f32,
    pub bin: u32,
}

/// Configuration a training set was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub feature_dim: usize,
    pub vector_len: usize,
    pub levels: usize,
    pub filter: WaveletFilter,
    pub g_sigma: f64,
    pub edges: Vec<f64>,
    /// `None` when the manifest mixes distortion types.
    pub kind: Option<DistortionKind>,
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub samples: Vec<LabeledSample>,
    pub meta: TrainingMeta,
}

/// Pick at most `budget` pixel indices, spreading the budget evenly over the
/// non-empty strata. A stratum smaller than its share contributes all of its
/// pixels and the surplus goes to the others. Output is sorted.
pub fn stratified_indices(bins: &[u32], budget: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let k = bins.iter().copied().max().map_or(0, |b| b as usize + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &b) in bins.iter().enumerate() {
        members[b as usize].push(i);
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let quota = water_fill(&sizes, budget);
    let mut out = Vec::with_capacity(quota.iter().sum());
    for (pool, &take) in members.iter().zip(&quota) {
        if take == pool.len() {
            out.extend_from_slice(pool);
        } else {
            out.extend(
                index::sample(rng, pool.len(), take)
                    .into_iter()
                    .map(|i| pool[i]),
            );
        }
    }
    out.sort_unstable();
    out
}

/// Per-stratum counts: `min(size, level)` with the largest common level that
/// fits, plus one extra for the first strata still below capacity.
fn water_fill(sizes: &[usize], budget: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total <= budget {
        return sizes.to_vec();
    }
    let used = |level: usize| sizes.iter().map(|&s| s.min(level)).sum::<usize>();
    let (mut lo, mut hi) = (0usize, *sizes.iter().max().unwrap_or(&0));
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if used(mid) <= budget {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let mut quota: Vec<usize> = sizes.iter().map(|&s| s.min(lo)).collect();
    let mut rest = budget - used(lo);
    for (q, &s) in quota.iter_mut().zip(sizes) {
        if rest == 0 {
            break;
        }
        if s > *q {
            *q += 1;
            rest -= 1;
        }
    }
    quota
}

/// Seed for the sampler of manifest entry `index`.
struct Prepared<T> {
    dist: ColorImage<T>,
    pyr: WaveletPyramid<T>,
    map: DistortionMap<T>,
}

fn prepare_entry<T: Real>(
    reference: &Path,
    distorted: &Path,
    levels: usize,
    config: &FrConfig,
) -> Result<Prepared<T>> {
    let r: ColorImage<T> = load_image(reference)?;
    let d: ColorImage<T> = load_image(distorted)?;
    if r.dims() != d.dims() {
        return Err(Error::DimensionMismatch(format!(
            "reference {:?} vs distorted {:?}",
            r.dims(),
            d.dims()
        )));
    }
    check_levels(d.width(), d.height(), levels)?;
    let pr = dwt2(&r.y, levels, config.wavelet.filter)?;
    let pd = dwt2(&d.y, levels, config.wavelet.filter)?;
    let g = coupling_matrix_with_sigma::<T>(pd.vector_len(), config.g_sigma)?;
    let map = weqa_map(&pr, &pd, &g)?;
    Ok(Prepared {
        dist: d,
        pyr: pd,
        map,
    })
}

/// Draw descriptors and labels from one distorted image and its map.
pub fn sample_image<T: Real>(
    dist: &ColorImage<T>,
    pyr: &WaveletPyramid<T>,
    labels: &PixelLabels,
    per_image: usize,
    seed: u64,
) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = stratified_indices(&labels.bin, per_image, &mut rng);
    let w = dist.width();
    let m = pyr.vector_len();
    let mut buf = vec![T::zero(); m];
    picks
        .into_iter()
        .map(|i| {
            let mut x = vec![0.0f32; feature_dim(m)];
            describe_into(dist, pyr, i % w, i / w, &mut buf, &mut x);
            LabeledSample {
                x,
                y: labels.y[i],
                bin: labels.bin[i],
            }
        })
        .collect()
}

/// Run the full-reference metric on every manifest pair and draw a
/// stratified, labeled descriptor set. Relative manifest paths are resolved
/// against `root`. The result depends only on the inputs and `policy.seed`.
pub fn sample_training_set<T: Real>(
    manifest: &DatasetManifest,
    root: &Path,
    policy: &SamplingPolicy,
    config: &FrConfig,
) -> Result<TrainingSet> {
    if manifest.is_empty() {
        return Err(Error::EmptySamples);
    }
    if policy.per_image == 0 || policy.strata == 0 {
        return Err(Error::InvalidConfig(
            "per_image and strata must be >= 1".into(),
        ));
    }
    if let Some(edges) = &policy.edges {
        check_edges(edges)?;
    }
    let levels = match config.wavelet.levels {
        Some(l) => l,
        None => {
            let first = &manifest.entries[0];
            let img: ColorImage<T> =
                load_image(first.dist_under(root)).map_err(|e| Error::Entry {
                    index: 0,
                    path: first.dist_path.clone(),
                    source: Box::new(e),
                })?;
            config.wavelet.levels_for(img.width(), img.height())
        }
    };

    let prepared: Vec<Result<Prepared<T>>> = manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            prepare_entry(&e.ref_under(root), &e.dist_under(root), levels, config).map_err(|err| {
                Error::Entry {
                    index: i,
                    path: e.dist_path.clone(),
                    source: Box::new(err),
                }
            })
        })
        .collect();
    let prepared: Vec<Prepared<T>> = prepared.into_iter().collect::<Result<_>>()?;

    let edges = match &policy.edges {
        Some(e) => e.clone(),
        None => {
            let pooled: Vec<f64> = prepared
                .iter()
                .flat_map(|p| {
                    p.map
                        .values()
                        .iter()
                        .map(|v| v.to_f32().unwrap_or(0.0) as f64)
                })
                .collect();
            quantile_edges(&pooled, policy.strata)
        }
    };

    let per_entry: Vec<Result<Vec<LabeledSample>>> = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let labels = label_pixels(&p.map, &edges)?;
            Ok(sample_image(
                &p.dist,
                &p.pyr,
                &labels,
                policy.per_image,
                derive_seed(policy.seed, i as u64),
            ))
        })
        .collect();
    let mut samples = Vec::new();
    for s in per_entry {
        samples.extend(s?);
    }

    let m = 3 * levels + 1;
    let kinds: Vec<DistortionKind> = manifest.entries.iter().map(|e| e.distortion_type).collect();
    let kind = kinds
        .first()
        .copied()
        .filter(|k| kinds.iter().all(|x| x == k));
    debug_assert!(samples
        .iter()
        .all(|s| s.bin == quantize(s.y as f64, &edges)));
    Ok(TrainingSet {
        samples,
        meta: TrainingMeta {
            feature_dim: feature_dim(m),
            vector_len: m,
            levels,
            filter: config.wavelet.filter,
            g_sigma: config.g_sigma,
            edges,
            kind,
            images: manifest.len(),
        },
    })
}
