use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde_json::json;

use iqa_core::descriptors::{encode_samples, sample_training_set};
use iqa_core::eval::{evaluate_corpus, render_table};
use iqa_core::fr::{ssim_assess, weqa_assess};
use iqa_core::imgio::{
    apply_distortion, build_corpus_with, encode_image, load_image, read_manifest,
    synth::procedural_reference, CorpusSpec, DatasetManifest, DistortionKind, LEVELS,
};
use iqa_core::learn::{
    decode_model, encode_model, model_id_of_bytes, train_forest_set, train_kernel_scorer,
    ForestModel, KernelModel,
};
use iqa_core::nr::{image_signature, nr_assess_kernel, nr_assess_with_id};
use iqa_core::wavelet::WaveletFilter;
use iqa_core::Image;

use crate::config::RunConfig;
use crate::error::invalid;
use crate::output::{encode_map, ssim_distortion, Outputs};
use crate::{
    Cli, Command, CorpusArgs, DistortArgs, EvalArgs, FrArgs, NrArgs, TrainArgs, WaveletFlags,
};

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(invalid("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let out = Outputs { force: cli.force };
    match cli.command {
        Command::Fr(a) => fr(a, cfg, out),
        Command::Distort(a) => distort(a, cfg, out),
        Command::Corpus(a) => corpus(a, cfg, out),
        Command::Train(a) => train(a, cfg, out),
        Command::Nr(a) => nr(a, cfg, out),
        Command::Eval(a) => eval(a, cfg, out),
    }
}

fn parse_kind(s: &str) -> anyhow::Result<DistortionKind> {
    s.parse::<DistortionKind>()
        .map_err(|e| invalid(e.to_string()))
}

fn apply_wavelet(cfg: &mut RunConfig, flags: &WaveletFlags) -> anyhow::Result<()> {
    if let Some(f) = &flags.filter {
        cfg.wavelet.filter = f
            .parse::<WaveletFilter>()
            .map_err(|e| invalid(e.to_string()))?;
    }
    if flags.levels.is_some() {
        cfg.wavelet.levels = flags.levels;
    }
    if let Some(s) = flags.g_sigma {
        cfg.fr.g_sigma = s;
    }
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<Image> {
    Ok(load_image(path)?)
}

fn manifest_root(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn fr(a: FrArgs, mut cfg: RunConfig, out: Outputs) -> anyhow::Result<()> {
    apply_wavelet(&mut cfg, &a.wavelet)?;
    out.check(
        [&a.map_out, &a.ssim_map_out, &a.report]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path),
    )?;
    let reference = load(&a.reference)?;
    let distorted = load(&a.dist)?;
    let weqa = weqa_assess(&reference, &distorted, &cfg.fr_config())?;
    let ssim = ssim_assess(&reference, &distorted)?;
    let (lo, hi) = weqa.map.min_max();
    if let Some(p) = &a.map_out {
        out.write(p, &encode_map(&weqa.map, p)?.0)?;
    }
    if let Some(p) = &a.ssim_map_out {
        out.write(p, &encode_map(&ssim_distortion(&ssim.ssim_map)?, p)?.0)?;
    }
    let report = json!({
        "ref": display(&a.reference),
        "dist": display(&a.dist),
        "config": cfg.echo(),
        "weqa": {
            "mean_distortion": weqa.mean_distortion,
            "o_score": weqa.o_score,
            "levels": weqa.levels,
            "map_min": lo,
            "map_max": hi,
        },
        "ssim": { "mean_ssim": ssim.mean_ssim },
    });
    match &a.report {
        Some(p) => out.write_json(p, &report),
        None => {
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn distort(a: DistortArgs, mut cfg: RunConfig, out: Outputs) -> anyhow::Result<()> {
    let kind = parse_kind(&a.kind)?;
    kind.parameter(a.level)?;
    let seed = cfg.resolve_seed(a.seed)?;
    out.check([a.out.as_path()])?;
    let img = load(&a.reference)?;
    let d = apply_distortion(&img, kind, a.level, seed)?;
    out.write(&a.out, &encode_image(&d, &a.out)?)
}

fn reference_images(dir: &Path) -> anyhow::Result<Vec<(String, Image)>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension()
                    .and_then(|e| e.to_str())
                    .map(str::to_ascii_lowercase)
                    .as_deref(),
                Some("png" | "pgm" | "ppm")
            )
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(invalid(format!(
            "no .png/.pgm/.ppm images in {}",
            dir.display()
        )));
    }
    let mut refs: Vec<(String, Image)> = Vec::with_capacity(files.len());
    for f in files {
        let name = f
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if refs.iter().any(|(n, _)| *n == name) {
            return Err(invalid(format!("two references named {name}")));
        }
        refs.push((name, load(&f)?));
    }
    Ok(refs)
}

fn corpus(a: CorpusArgs, mut cfg: RunConfig, out: Outputs) -> anyhow::Result<()> {
    let kinds = if a.types.is_empty() {
        DistortionKind::ALL.to_vec()
    } else {
        a.types
            .iter()
            .map(|s| parse_kind(s))
            .collect::<anyhow::Result<_>>()?
    };
    let levels: Vec<u32> = if a.levels.is_empty() {
        LEVELS.collect()
    } else {
        a.levels.clone()
    };
    for &l in &levels {
        DistortionKind::GaussianNoise.parameter(l)?;
    }
    let seed = cfg.resolve_seed(a.seed)?;
    let manifest_path = a
        .manifest
        .clone()
        .unwrap_or_else(|| a.out.join("manifest.csv"));
    out.check([manifest_path.as_path()])?;
    let refs = match (&a.refs, a.synthetic) {
        (Some(dir), None) => reference_images(dir)?,
        (None, Some(n)) if n > 0 => {
            if a.size < 8 {
                return Err(invalid("--size must be >= 8"));
            }
            (0..n)
                .map(|i| {
                    (
                        format!("synth_{i:03}"),
                        procedural_reference(i, a.size, a.size, seed),
                    )
                })
                .collect()
        }
        _ => return Err(invalid("give either --refs DIR or --synthetic N (N >= 1)")),
    };
    let spec = CorpusSpec {
        kinds,
        levels,
        seed,
    };
    let manifest = build_corpus_with(&refs, &a.out, &spec, &|p, b| out.write_core(p, b))?;

    std::fs::create_dir_all(manifest_root(&manifest_path))?;
    let out_abs = a.out.canonicalize()?;
    let manifest = if manifest_root(&manifest_path).canonicalize()? == out_abs {
        manifest
    } else {
        let mut m = manifest;
        for e in &mut m.entries {
            e.ref_path = out_abs.join(&e.ref_path);
            e.dist_path = out_abs.join(&e.dist_path);
        }
        m
    };
    out.write(&manifest_path, &manifest.to_csv_bytes()?)?;
    log::info!(
        "wrote {} entries to {}",
        manifest.len(),
        manifest_path.display()
    );
    Ok(())
}

fn train(a: TrainArgs, mut cfg: RunConfig, out: Outputs) -> anyhow::Result<()> {
    apply_wavelet(&mut cfg, &a.wavelet)?;
    let f = &mut cfg.forest;
    f.n_trees = a.trees.unwrap_or(f.n_trees);
    f.k_candidates = a.k.or(f.k_candidates);
    f.min_leaf = a.min_leaf.unwrap_or(f.min_leaf);
    f.max_depth = a.max_depth.unwrap_or(f.max_depth);
    let s = &mut cfg.sampling;
    s.per_image = a.per_image.unwrap_or(s.per_image);
    s.strata = a.strata.unwrap_or(s.strata);
    cfg.kernel.lambda = a.lambda.unwrap_or(cfg.kernel.lambda);
    cfg.kernel.stride = a.scorer_stride.unwrap_or(cfg.kernel.stride);
    cfg.resolve_seed(a.seed)?;
    out.check(
        [
            Some(&a.model_out),
            a.kernel_scorer.as_ref(),
            a.samples_out.as_ref(),
            a.report.as_ref(),
        ]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path),
    )?;

    let full = read_manifest(&a.manifest)?;
    let root = manifest_root(&a.manifest);
    let (manifest, type_label) = match a.kind.as_deref() {
        Some("pooled") => {
            log::warn!("pooled training over mixed distortion types is experimental");
            (full, "pooled".to_string())
        }
        Some(k) => {
            let kind = parse_kind(k)?;
            let m = full.of_kind(kind);
            if m.is_empty() {
                return Err(invalid(format!("manifest has no {kind} entries")));
            }
            (m, kind.to_string())
        }
        None => {
            let first = full.entries.first().map(|e| e.distortion_type);
            match first {
                Some(k) if full.entries.iter().all(|e| e.distortion_type == k) => {
                    (full, k.to_string())
                }
                Some(_) => {
                    return Err(invalid(
                        "manifest mixes distortion types; pass --type <type> or --type pooled",
                    ))
                }
                None => return Err(invalid("manifest is empty")),
            }
        }
    };

    let set = sample_training_set::<f64>(&manifest, &root, &cfg.sampling, &cfg.fr_config())?;
    let model = train_forest_set(&set, &cfg.forest)?;
    let bytes = encode_model(&model);
    let id = model_id_of_bytes(&bytes);
    out.write(&a.model_out, &bytes)?;
    if let Some(p) = &a.samples_out {
        out.write(p, &encode_samples(&set.samples, &set.meta.edges)?)?;
    }

    let mut scorer_summary = serde_json::Value::Null;
    if let Some(p) = &a.kernel_scorer {
        let scorer = fit_scorer(&manifest, &root, &model, &id, &cfg)?;
        scorer_summary = json!({
            "path": display(p),
            "images": scorer.support.len(),
            "lambda": scorer.lambda,
            "stride": scorer.stride,
        });
        out.write_json(p, &scorer)?;
    }

    let report = json!({
        "config": cfg.echo(),
        "manifest": display(&a.manifest),
        "type": type_label,
        "images": set.meta.images,
        "samples": set.samples.len(),
        "feature_dim": set.meta.feature_dim,
        "levels": set.meta.levels,
        "edges": set.meta.edges,
        "model": display(&a.model_out),
        "model_id": id,
        "kernel_scorer": scorer_summary,
    });
    match &a.report {
        Some(p) => out.write_json(p, &report)?,
        None => eprintln!(
            "model {id}: {} samples from {} images",
            set.samples.len(),
            set.meta.images
        ),
    }
    Ok(())
}

fn fit_scorer(
    manifest: &DatasetManifest,
    root: &Path,
    model: &ForestModel,
    id: &str,
    cfg: &RunConfig,
) -> anyhow::Result<KernelModel> {
    let fr_config = cfg.fr_config();
    let stride = cfg.kernel.stride;
    let pairs: Vec<iqa_core::Result<_>> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let r: Image = load_image(e.ref_under(root))?;
            let d: Image = load_image(e.dist_under(root))?;
            let q = weqa_assess(&r, &d, &fr_config)?.o_score;
            Ok((image_signature(&d, model, stride)?, q))
        })
        .collect();
    let pairs = pairs.into_iter().collect::<iqa_core::Result<Vec<_>>>()?;
    Ok(train_kernel_scorer(id, &pairs, cfg.kernel.lambda, stride)?)
}

fn nr(a: NrArgs, cfg: RunConfig, out: Outputs) -> anyhow::Result<()> {
    let stride = a.stride.unwrap_or(cfg.stride);
    if stride == 0 {
        return Err(invalid("--stride must be >= 1"));
    }
    if a.map_out.is_some() && a.dist.len() != 1 {
        return Err(invalid("--map-out needs exactly one --dist"));
    }
    out.check(
        [&a.map_out, &a.report]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path),
    )?;
    let bytes =
        std::fs::read(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let model = decode_model(&bytes)?;
    let id = model_id_of_bytes(&bytes);
    let scorer: Option<KernelModel> = match &a.scorer {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let s: KernelModel = serde_json::from_str(&text)
                .map_err(|e| invalid(format!("scorer {}: {e}", p.display())))?;
            if s.forest_id != id {
                return Err(iqa_core::Error::ScorerMismatch {
                    expected: s.forest_id,
                    got: id,
                }
                .into());
            }
            Some(s)
        }
        None => None,
    };

    let mut lines = String::new();
    for path in &a.dist {
        let img = load(path)?;
        let result = nr_assess_with_id(&img, &model, stride, &id)?;
        let mut record = result.record(display(path));
        if let Some(s) = &scorer {
            record.kernel_o_score = Some(nr_assess_kernel(&img, &model, s)?);
        }
        if let Some(p) = &a.map_out {
            out.write(p, &encode_map(&result.map, p)?.0)?;
        }
        lines.push_str(&serde_json::to_string(&record)?);
        lines.push('\n');
    }
    match &a.report {
        Some(p) => out.write(p, lines.as_bytes()),
        None => {
            print!("{lines}");
            Ok(())
        }
    }
}

fn eval(a: EvalArgs, mut cfg: RunConfig, out: Outputs) -> anyhow::Result<()> {
    apply_wavelet(&mut cfg, &a.wavelet)?;
    if a.stride == 0 {
        return Err(invalid("--stride must be >= 1"));
    }
    out.check(a.report_out.iter().map(PathBuf::as_path))?;
    let manifest = read_manifest(&a.manifest)?;
    let model = match &a.model {
        Some(p) => Some(decode_model(
            &std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        )?),
        None => None,
    };
    let mut report = evaluate_corpus(
        &manifest,
        &manifest_root(&a.manifest),
        model.as_ref(),
        &cfg.fr_config(),
        a.stride,
    )?;
    report.config = json!({
        "run": cfg.echo(),
        "manifest": display(&a.manifest),
        "model": a.model.as_deref().map(display),
        "model_id": report.config["model_id"].clone(),
        "stride": a.stride,
    });
    print!("{}", render_table(&report));
    if let Some(p) = &a.report_out {
        out.write_json(p, &report)?;
    }
    if report.entries.is_empty() && !report.failures.is_empty() {
        anyhow::bail!(
            "all {} entries failed; first: {}",
            report.failures.len(),
            report.failures[0].error
        );
    }
    Ok(())
}
