//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use iqa_core::descriptors::{feature_dim, sample_training_set, LabeledSample, SamplingPolicy};
use iqa_core::eval::{evaluate_corpus, srocc};
use iqa_core::fr::{coupling_matrix, ssim_assess, weqa_assess, weqa_distance, FrConfig};
use iqa_core::imgio::{
    apply_distortion, build_corpus, load_image, synth::procedural_reference, CorpusSpec,
    DatasetManifest, DistortionKind, ImagePlane,
};
use iqa_core::learn::{
    decode_model, encode_model, load_model, save_model, train_forest, train_forest_set,
    ForestConfig, ForestModel,
};
use iqa_core::wavelet::{dwt2, idwt2, WaveVector, WaveletFilter};
use iqa_core::{Error, Image, Plane};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DISTANCE_TOL: f64 = 1e-10;
const TRIANGLE_SLACK: f64 = 1e-9;
const COUPLING_EIG_TOL: f64 = -1e-10;
const HAAR_RECON_TOL: f64 = 1e-8;
const DB2_RECON_TOL: f64 = 1e-6;
const HAAR_ENERGY_REL_TOL: f64 = 1e-6;
const SSIM_IDENTITY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-12;
const GRAM_EIG_TOL: f64 = -1e-8;
const MIN_BLIND_SROCC: f64 = 0.8;
const MIN_MAP_PEARSON: f64 = 0.5;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn photos_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../testdata/photos")
}

fn photos() -> Vec<(String, Image)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(photos_dir())
        .expect("testdata/photos")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, load_image(&p).unwrap())
        })
        .collect()
}

fn random_plane(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Plane {
    ImagePlane::from_fn(w, h, |_, _| rng.random::<f64>())
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Rank by explicit pairwise comparison, ties averaged.
fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

fn identity() -> Outcome {
    let imgs = photos();
    let mut worst_q = 1.0f64;
    let mut worst_ssim = 0.0f64;
    let mut nonzero = 0;
    for (_, img) in &imgs {
        let fr = weqa_assess(img, img, &FrConfig::default()).unwrap();
        nonzero += fr.map.values().iter().filter(|&&v| v != 0.0).count();
        if fr.o_score != 1.0 {
            worst_q = fr.o_score;
        }
        let s = ssim_assess(img, img).unwrap();
        worst_ssim = worst_ssim.max((s.mean_ssim - 1.0).abs());
    }
    outcome(
        imgs.len() == 10 && nonzero == 0 && worst_q == 1.0 && worst_ssim <= SSIM_IDENTITY_TOL,
        format!(
            "{} images, nonzero map pixels {nonzero}, Q {worst_q}, max |ssim-1| {worst_ssim:.1e}",
            imgs.len()
        ),
    )
}

fn distance_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut max_err, mut asym, mut violations) = (0.0f64, 0, 0);
    for i in 0..10_000 {
        let m = [4, 7, 13][i % 3];
        let g = coupling_matrix::<f64>(m).unwrap();
        let mut draw = || {
            WaveVector(
                (0..m)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect::<Vec<f64>>(),
            )
        };
        let (a, b, c) = (draw(), draw(), draw());
        let delta: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect();
        let mut brute = 0.0;
        for p in 0..m {
            for q in 0..m {
                let d = p as f64 - q as f64;
                brute += delta[p] * (-d * d / 2.0).exp() * delta[q];
            }
        }
        let ab = weqa_distance(&a, &b, &g).unwrap();
        max_err = max_err.max((ab * ab - brute).abs());
        if ab != weqa_distance(&b, &a, &g).unwrap() {
            asym += 1;
        }
        let ac = weqa_distance(&a, &c, &g).unwrap();
        let bc = weqa_distance(&b, &c, &g).unwrap();
        if ac > ab + bc + TRIANGLE_SLACK {
            violations += 1;
        }
    }
    outcome(
        max_err <= DISTANCE_TOL && asym == 0 && violations == 0,
        format!(
            "max |d^2 - brute| {max_err:.2e}, asymmetric {asym}, triangle violations {violations}"
        ),
    )
}

fn coupling() -> Outcome {
    let mut min_eig = f64::INFINITY;
    let mut bad = Vec::new();
    for m in 1..=64 {
        let g = coupling_matrix::<f64>(m).unwrap();
        let mat = DMatrix::from_fn(m, m, |i, j| g.get(i, j));
        if mat != mat.transpose() || (0..m).any(|i| mat[(i, i)] != 1.0) {
            bad.push(m);
        }
        let e = mat.symmetric_eigenvalues().min();
        min_eig = min_eig.min(e);
        if e <= COUPLING_EIG_TOL {
            bad.push(m);
        }
    }
    outcome(
        bad.is_empty(),
        format!("M=1..64, min eigenvalue {min_eig:.3e}, failing orders {bad:?}"),
    )
}

fn wavelet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut haar_err, mut db2_err, mut energy_err) = (0.0f64, 0.0f64, 0.0f64);
    for &n in &[8usize, 16, 32, 33, 64] {
        let levels = (n.ilog2() as usize).min(4);
        let p = random_plane(n, n, &mut rng);
        if n % 2 == 0 {
            let pyr = dwt2(&p, levels, WaveletFilter::Haar).unwrap();
            let back = idwt2(&pyr).unwrap();
            for (a, b) in p.as_slice().iter().zip(back.as_slice()) {
                haar_err = haar_err.max((a - b).abs());
            }
            energy_err = energy_err.max((pyr.energy() - p.energy()).abs() / p.energy());
        }
        let pyr = dwt2(&p, levels, WaveletFilter::Db2).unwrap();
        let back = idwt2(&pyr).unwrap();
        for (a, b) in p.as_slice().iter().zip(back.as_slice()) {
            db2_err = db2_err.max((a - b).abs());
        }
    }
    outcome(
        haar_err < HAAR_RECON_TOL && db2_err < DB2_RECON_TOL && energy_err <= HAAR_ENERGY_REL_TOL,
        format!(
            "haar recon {haar_err:.1e}, db2 recon {db2_err:.1e}, haar energy rel {energy_err:.1e}"
        ),
    )
}

fn fr_monotonicity() -> Outcome {
    let levels: Vec<f64> = (1..=5).map(f64::from).collect();
    let mut per_image = Vec::new();
    let mut pass = true;
    for i in 0..5 {
        let r = procedural_reference(i, 128, 128, 0);
        let (mut dbar, mut q) = (Vec::new(), Vec::new());
        for level in 1..=5 {
            let d = apply_distortion(&r, DistortionKind::GaussianNoise, level, i as u64).unwrap();
            let fr = weqa_assess(&r, &d, &FrConfig::default()).unwrap();
            dbar.push(fr.mean_distortion);
            q.push(fr.o_score);
        }
        let (sd, sq) = (srocc(&levels, &dbar).unwrap(), srocc(&levels, &q).unwrap());
        pass &= sd == 1.0 && sq == -1.0;
        per_image.push(format!("{sd:+.0}/{sq:+.0}"));
    }
    outcome(
        pass,
        format!(
            "SROCC(level, D)/(level, Q) per image: {}",
            per_image.join(" ")
        ),
    )
}

fn rank_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut max_err = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.random_range(3..60);
        let tied = checked % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if tied {
                        rng.random_range(0..5) as f64
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect()
        };
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let (rx, ry) = (brute_ranks(&x), brute_ranks(&y));
        if rx.iter().all(|&v| v == rx[0]) || ry.iter().all(|&v| v == ry[0]) {
            continue;
        }
        max_err = max_err.max((srocc(&x, &y).unwrap() - pearson(&rx, &ry)).abs());
        checked += 1;
    }
    let tie = srocc(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
    let tie_err = (tie - 3f64.sqrt() / 2.0).abs();
    outcome(
        max_err <= RANK_TOL && tie_err <= RANK_TOL,
        format!("1000 vectors max err {max_err:.1e}, tie example {tie:.6} (err {tie_err:.1e})"),
    )
}

fn uniform(n: usize, dim: usize, seed: u64, f: impl Fn(&[f32]) -> f32) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: Vec<f32> = (0..dim).map(|_| rng.random::<f32>()).collect();
            LabeledSample {
                y: f(&x),
                x,
                bin: 0,
            }
        })
        .collect()
}

fn forest_sanity() -> Outcome {
    let train = uniform(10_000, 8, 71, |x| x[0]);
    let test = uniform(2_000, 8, 72, |x| x[0]);
    let model = train_forest(&train, &ForestConfig::default()).unwrap();
    let mse = test
        .iter()
        .map(|s| (model.predict(&s.x).unwrap() - s.y as f64).powi(2))
        .sum::<f64>()
        / test.len() as f64;
    let c = 0.37f32;
    let flat = train_forest(&uniform(2_000, 8, 73, |_| c), &ForestConfig::default()).unwrap();
    let exact = test.iter().all(|s| flat.predict(&s.x).unwrap() == c as f64);
    outcome(
        mse <= 1.0 / 48.0 && exact,
        format!(
            "y=x1 test MSE {mse:.5} (limit {:.5}), constant target reproduced exactly: {exact}",
            1.0 / 48.0
        ),
    )
}

fn forest_kernel() -> Outcome {
    let dim = feature_dim(13);
    let model: ForestModel = train_forest(
        &uniform(3_000, dim, 81, |x| x[0] * x[1] + x[5]),
        &ForestConfig::default(),
    )
    .unwrap();
    let pts = uniform(200, dim, 82, |_| 0.0);
    let n = pts.len();
    let gram = DMatrix::from_fn(n, n, |i, j| model.kernel(&pts[i].x, &pts[j].x).unwrap());
    let symmetric = gram == gram.transpose();
    let unit = (0..n).all(|i| gram[(i, i)] == 1.0);
    let min = gram.symmetric_eigenvalues().min();
    outcome(
        symmetric && unit && min >= GRAM_EIG_TOL,
        format!("200x200 Gram symmetric {symmetric}, K(x,x)=1 {unit}, min eigenvalue {min:.3e}"),
    )
}

/// 10 procedural textures and 10 photos, interleaved.
fn blind_references() -> Vec<(String, Image)> {
    let mut refs = Vec::new();
    for (i, photo) in photos().into_iter().enumerate() {
        refs.push((format!("proc_{i:02}"), procedural_reference(i, 128, 128, 0)));
        refs.push(photo);
    }
    refs
}

fn blind_pipeline(kind: DistortionKind) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let refs = blind_references();
    let held_out: Vec<&str> = refs
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 4 == 3)
        .map(|(_, r)| r.0.as_str())
        .collect();
    let spec = CorpusSpec {
        kinds: vec![kind],
        levels: (1..=5).collect(),
        seed: 0,
    };
    let manifest = build_corpus(&refs, dir.path(), &spec).unwrap();
    let (test, train): (Vec<_>, Vec<_>) = manifest.entries.into_iter().partition(|e| {
        let stem = e
            .ref_path
            .file_stem()
            .unwrap()
            .to_string_lossy()
            .into_owned();
        held_out.contains(&stem.as_str())
    });
    let (train, test) = (
        DatasetManifest::new(train).unwrap(),
        DatasetManifest::new(test).unwrap(),
    );
    let config = FrConfig::default();
    let set = sample_training_set::<f64>(&train, dir.path(), &SamplingPolicy::default(), &config)
        .unwrap();
    let model = train_forest_set(&set, &ForestConfig::default()).unwrap();
    let report = evaluate_corpus(&test, dir.path(), Some(&model), &config, 1).unwrap();
    let rho = report
        .overall
        .nr_q_vs_fr_q
        .as_ref()
        .and_then(|c| c.srocc)
        .unwrap_or(f64::NAN);
    let r = report
        .overall
        .nr_vs_fr_map
        .as_ref()
        .and_then(|m| m.mean_pearson)
        .unwrap_or(f64::NAN);
    let failures = report.failures.len();
    outcome(
        rho >= MIN_BLIND_SROCC && r >= MIN_MAP_PEARSON && failures == 0,
        format!(
            "{kind}: train {} imgs, held out {} ({}), SROCC(NR Q, FR Q) {rho:.3} (min {MIN_BLIND_SROCC}), mean map r {r:.3} (min {MIN_MAP_PEARSON})",
            train.len(),
            test.len(),
            held_out.join(","),
        ),
    )
}

fn blind_generality() -> Outcome {
    let parts: Vec<Outcome> = [DistortionKind::GaussianBlur, DistortionKind::JpegBlocking]
        .into_iter()
        .map(blind_pipeline)
        .collect();
    outcome(
        parts.iter().all(|o| o.pass),
        parts
            .iter()
            .map(|o| format!("[{}] {}", if o.pass { "ok" } else { "short" }, o.detail))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn persistence() -> Outcome {
    let model = train_forest(
        &uniform(2_000, 12, 91, |x| x[2] - x[7] * x[7]),
        &ForestConfig::default(),
    )
    .unwrap();
    let bytes = encode_model(&model);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    let identical = uniform(100, 12, 92, |_| 0.0)
        .iter()
        .all(|s| model.predict(&s.x).unwrap().to_bits() == loaded.predict(&s.x).unwrap().to_bits());
    let step = (bytes.len() / 997).max(1);
    let truncations_rejected = (0..bytes.len())
        .step_by(step)
        .chain([bytes.len() - 1])
        .all(|n| decode_model(&bytes[..n]).is_err());
    let mut wrong = bytes.clone();
    wrong[5] = b'7';
    let version_rejected = matches!(decode_model(&wrong), Err(Error::UnsupportedVersion { .. }));
    outcome(
        identical && truncations_rejected && version_rejected,
        format!(
            "{} bytes, 100 predictions bit-identical {identical}, truncations rejected {truncations_rejected}, NRIQA7 rejected {version_rejected}",
            bytes.len()
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_iqa"))
        .current_dir(dir)
        .env_remove("IQA_SEED")
        .args(args)
        .status()
        .is_ok_and(|s| s.success())
}

fn reproducibility() -> Outcome {
    let runs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut ran = true;
    for dir in &runs {
        let d = dir.path();
        ran &= run_cli(
            d,
            &[
                "corpus",
                "--synthetic",
                "6",
                "--size",
                "64",
                "--out",
                "c",
                "--types",
                "jpeg_blocking",
                "--seed",
                "5",
            ],
        );
        ran &= run_cli(
            d,
            &[
                "train",
                "--manifest",
                "c/manifest.csv",
                "--model-out",
                "m.bin",
                "--trees",
                "20",
                "--seed",
                "11",
                "--kernel-scorer",
                "k.json",
                "--samples-out",
                "s.bin",
                "--report",
                "train.json",
            ],
        );
        ran &= run_cli(
            d,
            &[
                "nr",
                "--model",
                "m.bin",
                "--dist",
                "c/dist/synth_002_jpeg_blocking_4.png",
                "--scorer",
                "k.json",
                "--map-out",
                "map.png",
                "--report",
                "nr.jsonl",
            ],
        );
        ran &= run_cli(
            d,
            &[
                "nr",
                "--model",
                "m.bin",
                "--dist",
                "c/dist/synth_005_jpeg_blocking_2.png",
                "--map-out",
                "map.raw",
                "--report",
                "nr2.jsonl",
            ],
        );
    }
    let files = [
        "m.bin",
        "k.json",
        "s.bin",
        "train.json",
        "map.png",
        "map.raw",
        "nr.jsonl",
        "nr2.jsonl",
    ];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| {
            std::fs::read(runs[0].path().join(f)).ok() != std::fs::read(runs[1].path().join(f)).ok()
        })
        .collect();
    outcome(
        ran && differing.is_empty(),
        format!(
            "all commands succeeded {ran}, {} outputs compared, differing {differing:?}",
            files.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("identity", identity),
        ("distance oracle", distance_oracle),
        ("coupling matrix", coupling),
        ("wavelet", wavelet),
        ("FR monotonicity", fr_monotonicity),
        ("rank-correlation oracle", rank_oracle),
        ("forest sanity", forest_sanity),
        ("forest kernel", forest_kernel),
        ("blind pipeline (gaussian_noise)", || {
            blind_pipeline(DistortionKind::GaussianNoise)
        }),
        ("per-distortion generality", blind_generality),
        ("persistence", persistence),
        ("reproducibility", reproducibility),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
