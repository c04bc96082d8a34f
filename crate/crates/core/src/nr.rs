//! Blind assessment: predicted distortion maps and scores from a trained
//! forest, without the reference image.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{describe_into, feature_dim};
use crate::error::{Error, Result};
use crate::fr::{pool_score, DistortionMap};
use crate::imgio::{ColorImage, ImagePlane};
use crate::learn::{model_id, ForestModel, ImageSignature, KernelModel};
use crate::scalar::Real;
use crate::wavelet::{check_levels, dwt2, WaveletPyramid};

#[derive(Debug, Clone, PartialEq)]
pub struct NrResult {
    pub map: DistortionMap<f64>,
    pub mean_distortion: f64,
    pub o_score: f64,
    pub model_id: String,
    pub stride: usize,
}

/// One line of the JSON-lines NR report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrRecord {
    pub path: String,
    pub model_id: String,
    pub mean_distortion: f64,
    pub o_score: f64,
    pub stride: usize,
    /// Score from the kernel regressor, when one was supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_o_score: Option<f64>,
}

impl NrResult {
    pub fn record(&self, path: impl Into<String>) -> NrRecord {
        NrRecord {
            path: path.into(),
            model_id: self.model_id.clone(),
            mean_distortion: self.mean_distortion,
            o_score: self.o_score,
            stride: self.stride,
            kernel_o_score: None,
        }
    }
}

/// Check that `img` can be described with the model's layout and build the
/// luma pyramid.
pub fn prepare<T: Real>(img: &ColorImage<T>, model: &ForestModel) -> Result<WaveletPyramid<T>> {
    let meta = &model.meta;
    let (w, h) = img.dims();
    let mismatch = |why: &str| Error::ConfigMismatch {
        model: meta.to_string(),
        image: format!("{w}x{h}: {why}"),
    };
    if !meta.describes_images() {
        return Err(mismatch("model was not trained on image descriptors"));
    }
    if meta.vector_len != 3 * meta.levels + 1 || meta.feature_dim != feature_dim(meta.vector_len) {
        return Err(mismatch("model descriptor layout is inconsistent"));
    }
    if check_levels(w, h, meta.levels).is_err() {
        return Err(mismatch(&format!(
            "image too small for {} wavelet levels (needs {}px on the short side)",
            meta.levels,
            1usize << meta.levels.min(30)
        )));
    }
    dwt2(&img.y, meta.levels, meta.filter)
}

fn check_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be >= 1".into()));
    }
    Ok(())
}

/// Evaluate `f` on standardized descriptors of the pixels `(x, y)` with both
/// coordinates multiples of `stride`. Rows of the grid are returned in order.
fn on_grid<T: Real, R: Send>(
    img: &ColorImage<T>,
    pyr: &WaveletPyramid<T>,
    model: &ForestModel,
    stride: usize,
    f: impl Fn(&[f32], &mut Vec<f32>, &mut Vec<u32>) -> R + Sync,
) -> Vec<Vec<R>> {
    let (w, h) = img.dims();
    let m = pyr.vector_len();
    let dim = model.meta.feature_dim;
    (0..h.div_ceil(stride))
        .into_par_iter()
        .map(|gy| {
            let mut wave = vec![T::zero(); m];
            let mut raw = vec![0.0f32; dim];
            let mut z = vec![0.0f32; dim];
            let mut leaves = Vec::with_capacity(model.n_trees());
            let mut sig = Vec::with_capacity(model.n_trees());
            (0..w.div_ceil(stride))
                .map(|gx| {
                    describe_into(img, pyr, gx * stride, gy * stride, &mut wave, &mut raw);
                    model.meta.standardize_into(&raw, &mut z);
                    f(&z, &mut leaves, &mut sig)
                })
                .collect()
        })
        .collect()
}

/// Predict a distortion map on the stride grid, fill the gaps with the
/// nearest grid value above-left, and pool it like the full-reference score.
pub fn nr_assess<T: Real>(
    img: &ColorImage<T>,
    model: &ForestModel,
    stride: usize,
) -> Result<NrResult> {
    nr_assess_with_id(img, model, stride, &model_id(model))
}

/// As [`nr_assess`] with a precomputed model id.
pub fn nr_assess_with_id<T: Real>(
    img: &ColorImage<T>,
    model: &ForestModel,
    stride: usize,
    id: &str,
) -> Result<NrResult> {
    check_stride(stride)?;
    let pyr = prepare(img, model)?;
    let grid = on_grid(img, &pyr, model, stride, |z, leaves, _| {
        model.predict_standardized(z, leaves)
    });
    let (w, h) = img.dims();
    let plane = ImagePlane::from_fn(w, h, |x, y| grid[y / stride][x / stride]);
    let map = DistortionMap::new(plane)?;
    let mean_distortion = map.mean();
    Ok(NrResult {
        map,
        mean_distortion,
        o_score: pool_score(mean_distortion),
        model_id: id.to_string(),
        stride,
    })
}

/// Leaf histograms of the stride-grid descriptors of `img`.
pub fn image_signature<T: Real>(
    img: &ColorImage<T>,
    model: &ForestModel,
    stride: usize,
) -> Result<ImageSignature> {
    check_stride(stride)?;
    let pyr = prepare(img, model)?;
    let grid = on_grid(img, &pyr, model, stride, |z, _, sig| {
        model.signature_standardized_into(z, sig);
        sig.clone()
    });
    ImageSignature::from_leaf_signatures(
        model.n_trees(),
        grid.iter().flatten().map(|s| s.as_slice()),
    )
}

/// Image-level score from the kernel regressor, clamped to `(0, 1]`.
pub fn nr_assess_kernel<T: Real>(
    img: &ColorImage<T>,
    forest: &ForestModel,
    scorer: &KernelModel,
) -> Result<f64> {
    let id = model_id(forest);
    if id != scorer.forest_id {
        return Err(Error::ScorerMismatch {
            expected: scorer.forest_id.clone(),
            got: id,
        });
    }
    let sig = image_signature(img, forest, scorer.stride)?;
    Ok(scorer.predict(&sig).clamp(f64::EPSILON, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::{LabeledSample, TrainingMeta, TrainingSet};
    use crate::learn::{train_forest, train_forest_set, train_kernel_scorer, ForestConfig};
    use crate::wavelet::WaveletFilter;

    fn image(seed: u64) -> ColorImage<f64> {
        crate::imgio::synth::procedural_reference(seed as usize, 32, 32, seed)
    }

    fn set(y: impl Fn(&[f32]) -> f32) -> TrainingSet {
        let img = image(1);
        let pyr = dwt2(&img.y, 2, WaveletFilter::Haar).unwrap();
        let m = pyr.vector_len();
        let mut samples = Vec::new();
        let mut buf = vec![0.0; m];
        for i in (0..32 * 32).step_by(3) {
            let mut x = vec![0.0; feature_dim(m)];
            describe_into(&img, &pyr, i % 32, i / 32, &mut buf, &mut x);
            let t = y(&x);
            samples.push(LabeledSample { x, y: t, bin: 0 });
        }
        TrainingSet {
            samples,
            meta: TrainingMeta {
                feature_dim: feature_dim(m),
                vector_len: m,
                levels: 2,
                filter: WaveletFilter::Haar,
                g_sigma: 1.0,
                edges: vec![],
                kind: None,
                images: 1,
            },
        }
    }

    fn cfg() -> ForestConfig {
        ForestConfig {
            n_trees: 10,
            ..Default::default()
        }
    }

    #[test]
    fn zero_model_gives_perfect_score() {
        let model = train_forest_set(&set(|_| 0.0), &cfg()).unwrap();
        let r = nr_assess(&image(2), &model, 1).unwrap();
        assert!(r.map.values().iter().all(|v| *v == 0.0));
        assert_eq!(r.o_score, 1.0);
    }

    #[test]
    fn deterministic_and_stride_fill() {
        let model = train_forest_set(&set(|x| x[0].abs()), &cfg()).unwrap();
        let img = image(3);
        let a = nr_assess(&img, &model, 3).unwrap();
        let b = nr_assess(&img, &model, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.map.dims(), (32, 32));
        assert_eq!(a.map.get(4, 7), a.map.get(3, 6));
        let full = nr_assess(&img, &model, 1).unwrap();
        assert_eq!(full.map.get(3, 6), a.map.get(3, 6));
        assert_eq!(a.o_score, 1.0 / (1.0 + a.mean_distortion));
    }

    #[test]
    fn layout_mismatches_are_refused() {
        let model = train_forest_set(&set(|x| x[0].abs()), &cfg()).unwrap();
        let tiny = crate::imgio::synth::procedural_reference(0, 3, 3, 0);
        assert!(matches!(
            nr_assess(&tiny, &model, 1),
            Err(Error::ConfigMismatch { .. })
        ));
        let bare = train_forest(&set(|_| 1.0).samples, &cfg()).unwrap();
        assert!(matches!(
            nr_assess(&image(2), &bare, 1),
            Err(Error::ConfigMismatch { .. })
        ));
        assert!(nr_assess(&image(2), &model, 0).is_err());
    }

    #[test]
    fn kernel_scorer_pairing() {
        let model = train_forest_set(&set(|x| x[1].abs()), &cfg()).unwrap();
        let pairs: Vec<_> = (0..5)
            .map(|i| (image_signature(&image(i), &model, 2).unwrap(), 0.6))
            .collect();
        let scorer = train_kernel_scorer(&model_id(&model), &pairs, 1.0, 2).unwrap();
        let q = nr_assess_kernel(&image(9), &model, &scorer).unwrap();
        assert!((q - 0.6).abs() < 1e-12);
        let other = train_forest_set(&set(|x| x[2].abs()), &cfg()).unwrap();
        assert!(matches!(
            nr_assess_kernel(&image(9), &other, &scorer),
            Err(Error::ScorerMismatch { .. })
        ));
    }
}
