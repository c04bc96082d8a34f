//! Synthetic distortion corpora: every reference under every requested
//! distortion type and level, written as PNG files plus a manifest.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::codec::encode_image;
use super::distort::{apply_distortion, DistortionKind};
use super::manifest::{DatasetManifest, ManifestEntry};
use super::plane::ColorImage;
use crate::derive_seed;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub kinds: Vec<DistortionKind>,
    pub levels: Vec<u32>,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            kinds: DistortionKind::ALL.to_vec(),
            levels: super::distort::LEVELS.collect(),
            seed: 0,
        }
    }
}

/// Seed of the distortion applied to reference `index` for `kind`. All
/// levels share it, so noise patterns are nested across levels.
pub fn corpus_seed(seed: u64, index: usize, kind: DistortionKind) -> u64 {
    derive_seed(seed, index as u64 * 8 + kind.code() as u64)
}

/// Write `refs/<name>.png` and `dist/<name>_<type>_<level>.png` under
/// `out` and return the manifest, with paths relative to `out`. Rows are
/// ordered by reference, then type, then level.
pub fn build_corpus(
    refs: &[(String, ColorImage<f64>)],
    out: &Path,
    spec: &CorpusSpec,
) -> Result<DatasetManifest> {
    build_corpus_with(refs, out, spec, &|path, bytes| {
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    })
}

/// As [`build_corpus`], handing every encoded file to `sink` instead of
/// writing it directly.
pub fn build_corpus_with(
    refs: &[(String, ColorImage<f64>)],
    out: &Path,
    spec: &CorpusSpec,
    sink: &(dyn Fn(&Path, &[u8]) -> Result<()> + Sync),
) -> Result<DatasetManifest> {
    if refs.is_empty() || spec.kinds.is_empty() || spec.levels.is_empty() {
        return Err(Error::InvalidConfig(
            "corpus needs references, types and levels".into(),
        ));
    }
    for &level in &spec.levels {
        DistortionKind::GaussianNoise.parameter(level)?;
    }
    for dir in ["refs", "dist"] {
        let d = out.join(dir);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let rows: Vec<Result<Vec<ManifestEntry>>> = refs
        .par_iter()
        .enumerate()
        .map(|(i, (name, img))| {
            let ref_path = PathBuf::from("refs").join(format!("{name}.png"));
            let target = out.join(&ref_path);
            sink(&target, &encode_image(img, &target)?)?;
            let mut rows = Vec::new();
            for &kind in &spec.kinds {
                let seed = corpus_seed(spec.seed, i, kind);
                for &level in &spec.levels {
                    let dist = apply_distortion(img, kind, level, seed)?;
                    let dist_path =
                        PathBuf::from("dist").join(format!("{name}_{kind}_{level}.png"));
                    let target = out.join(&dist_path);
                    sink(&target, &encode_image(&dist, &target)?)?;
                    rows.push(ManifestEntry {
                        ref_path: ref_path.clone(),
                        dist_path,
                        distortion_type: kind,
                        level,
                        mos: None,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut entries = Vec::new();
    for r in rows {
        entries.extend(r?);
    }
    DatasetManifest::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgio::{load_image, synth::procedural_reference};

    #[test]
    fn layout_and_determinism() {
        let refs: Vec<_> = (0..2)
            .map(|i| (format!("r{i}"), procedural_reference(i, 16, 16, 3)))
            .collect();
        let spec = CorpusSpec {
            kinds: vec![DistortionKind::GaussianNoise, DistortionKind::JpegBlocking],
            levels: vec![1, 3],
            seed: 5,
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = build_corpus(&refs, a.path(), &spec).unwrap();
        let mb = build_corpus(&refs, b.path(), &spec).unwrap();
        assert_eq!(ma, mb);
        assert_eq!(ma.len(), 8);
        assert_eq!(
            ma.entries[1].dist_path,
            PathBuf::from("dist/r0_gaussian_noise_3.png")
        );
        for e in &ma.entries {
            let x = std::fs::read(a.path().join(&e.dist_path)).unwrap();
            let y = std::fs::read(b.path().join(&e.dist_path)).unwrap();
            assert_eq!(x, y);
        }
        let r: ColorImage<f64> = load_image(a.path().join(&ma.entries[0].ref_path)).unwrap();
        assert_eq!(r.dims(), (16, 16));
        let bad = CorpusSpec {
            levels: vec![6],
            ..spec
        };
        assert!(build_corpus(&refs, a.path(), &bad).is_err());
    }
}
