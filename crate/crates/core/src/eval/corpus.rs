//! Corpus-level evaluation report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corr::{map_compare, plcc, srocc, MapComparison};
use super::logistic::rmse_after_fit;
use crate::error::Result;
use crate::fr::{ssim_assess, weqa_assess, FrConfig};
use crate::imgio::{load_image, ColorImage, DatasetManifest, DistortionKind};
use crate::learn::{model_id, ForestModel};
use crate::nr::nr_assess_with_id;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub n: usize,
    pub srocc: Option<f64>,
    pub plcc: Option<f64>,
    pub rmse: Option<f64>,
}

impl Correlation {
    /// Coefficients are left out when `n < 3` or a side is constant.
    pub fn between(x: &[f64], y: &[f64]) -> Self {
        Self {
            n: x.len(),
            srocc: srocc(x, y).ok(),
            plcc: plcc(x, y).ok(),
            rmse: rmse_after_fit(x, y).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapAggregate {
    /// Maps with a defined Pearson coefficient.
    pub n: usize,
    pub mean_pearson: Option<f64>,
    pub mean_mae: f64,
}

impl MapAggregate {
    fn over<'a>(maps: impl Iterator<Item = &'a MapComparison>) -> Self {
        let (mut n, mut sum_r, mut sum_mae, mut count) = (0, 0.0, 0.0, 0);
        for m in maps {
            if let Some(r) = m.pearson {
                n += 1;
                sum_r += r;
            }
            sum_mae += m.mae;
            count += 1;
        }
        Self {
            n,
            mean_pearson: (n > 0).then(|| sum_r / n as f64),
            mean_mae: if count > 0 {
                sum_mae / count as f64
            } else {
                0.0
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrScores {
    pub mean_distortion: f64,
    pub o_score: f64,
    /// Predicted map against the full-reference map.
    pub map_vs_fr: MapComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryScores {
    pub index: usize,
    pub dist_path: PathBuf,
    pub distortion_type: DistortionKind,
    pub level: u32,
    pub mos: Option<f64>,
    pub fr_mean_distortion: f64,
    pub fr_o_score: f64,
    pub ssim: f64,
    /// WEQA map against the SSIM distortion map `1 - ssim`.
    pub weqa_vs_ssim_map: MapComparison,
    pub nr: Option<NrScores>,
}

/// Correlations over one distortion type, or over all entries. Score
/// correlations are against the raw level, so a working metric gives a
/// negative coefficient for `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: String,
    pub n: usize,
    pub fr_q_vs_level: Correlation,
    pub ssim_vs_level: Correlation,
    pub fr_q_vs_mos: Option<Correlation>,
    pub nr_q_vs_fr_q: Option<Correlation>,
    pub nr_q_vs_level: Option<Correlation>,
    pub nr_q_vs_mos: Option<Correlation>,
    pub weqa_vs_ssim_map: MapAggregate,
    pub nr_vs_fr_map: Option<MapAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub config: serde_json::Value,
    pub groups: Vec<GroupReport>,
    pub overall: GroupReport,
    pub entries: Vec<EntryScores>,
    pub failures: Vec<Failure>,
}

fn score_entry(
    index: usize,
    manifest: &DatasetManifest,
    root: &Path,
    model: Option<(&ForestModel, &str)>,
    config: &FrConfig,
    stride: usize,
) -> Result<EntryScores> {
    let e = &manifest.entries[index];
    let reference: ColorImage<f64> = load_image(e.ref_under(root))?;
    let distorted: ColorImage<f64> = load_image(e.dist_under(root))?;
    let fr = weqa_assess(&reference, &distorted, config)?;
    let ssim = ssim_assess(&reference, &distorted)?;
    let ssim_distortion = ssim.ssim_map.map(|v| 1.0 - v);
    let weqa_vs_ssim_map = map_compare(fr.map.plane(), &ssim_distortion)?;
    let nr = match model {
        Some((m, id)) => {
            let r = nr_assess_with_id(&distorted, m, stride, id)?;
            Some(NrScores {
                mean_distortion: r.mean_distortion,
                o_score: r.o_score,
                map_vs_fr: map_compare(r.map.plane(), fr.map.plane())?,
            })
        }
        None => None,
    };
    Ok(EntryScores {
        index,
        dist_path: e.dist_path.clone(),
        distortion_type: e.distortion_type,
        level: e.level,
        mos: e.mos,
        fr_mean_distortion: fr.mean_distortion,
        fr_o_score: fr.o_score,
        ssim: ssim.mean_ssim,
        weqa_vs_ssim_map,
        nr,
    })
}

fn group(name: &str, entries: &[&EntryScores], with_nr: bool) -> GroupReport {
    let col = |f: &dyn Fn(&EntryScores) -> f64| entries.iter().map(|e| f(e)).collect::<Vec<f64>>();
    let level = col(&|e| e.level as f64);
    let fr_q = col(&|e| e.fr_o_score);
    let has_mos = !entries.is_empty() && entries.iter().all(|e| e.mos.is_some());
    let mos = col(&|e| e.mos.unwrap_or(f64::NAN));
    let nr_q = col(&|e| e.nr.as_ref().map_or(f64::NAN, |n| n.o_score));
    GroupReport {
        group: name.to_string(),
        n: entries.len(),
        fr_q_vs_level: Correlation::between(&fr_q, &level),
        ssim_vs_level: Correlation::between(&col(&|e| e.ssim), &level),
        fr_q_vs_mos: has_mos.then(|| Correlation::between(&fr_q, &mos)),
        nr_q_vs_fr_q: with_nr.then(|| Correlation::between(&nr_q, &fr_q)),
        nr_q_vs_level: with_nr.then(|| Correlation::between(&nr_q, &level)),
        nr_q_vs_mos: (with_nr && has_mos).then(|| Correlation::between(&nr_q, &mos)),
        weqa_vs_ssim_map: MapAggregate::over(entries.iter().map(|e| &e.weqa_vs_ssim_map)),
        nr_vs_fr_map: with_nr.then(|| {
            MapAggregate::over(
                entries
                    .iter()
                    .filter_map(|e| e.nr.as_ref().map(|n| &n.map_vs_fr)),
            )
        }),
    }
}

/// Score every manifest entry with the full-reference metrics (and the
/// blind model when given) and correlate per distortion type and overall.
/// Entries that fail are listed in `failures` and left out of the groups.
pub fn evaluate_corpus(
    manifest: &DatasetManifest,
    root: &Path,
    model: Option<&ForestModel>,
    config: &FrConfig,
    stride: usize,
) -> Result<CorpusReport> {
    manifest.validate()?;
    let id = model.map(model_id);
    let pair = model.zip(id.as_deref());
    let results: Vec<Result<EntryScores>> = (0..manifest.len())
        .into_par_iter()
        .map(|i| score_entry(i, manifest, root, pair, config, stride))
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => entries.push(e),
            Err(err) => failures.push(Failure {
                index: i,
                path: manifest.entries[i].dist_path.clone(),
                error: err.to_string(),
            }),
        }
    }
    let with_nr = model.is_some();
    let groups = DistortionKind::ALL
        .iter()
        .filter_map(|k| {
            let members: Vec<&EntryScores> =
                entries.iter().filter(|e| e.distortion_type == *k).collect();
            (!members.is_empty()).then(|| group(k.as_str(), &members, with_nr))
        })
        .collect();
    let all: Vec<&EntryScores> = entries.iter().collect();
    let overall = group("overall", &all, with_nr);
    Ok(CorpusReport {
        config: serde_json::json!({
            "fr": config,
            "stride": stride,
            "model_id": id,
        }),
        groups,
        overall,
        entries,
        failures,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Aligned plain-text summary of a report.
pub fn render_table(report: &CorpusReport) -> String {
    let header = [
        "group",
        "n",
        "srocc(Q,lvl)",
        "plcc(Q,lvl)",
        "srocc(NR,FR)",
        "plcc(NR,FR)",
        "srocc(NR,lvl)",
        "r(WEQA,SSIM)",
        "r(NR,FR)",
    ];
    let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for g in report.groups.iter().chain(std::iter::once(&report.overall)) {
        rows.push(vec![
            g.group.clone(),
            g.n.to_string(),
            cell(g.fr_q_vs_level.srocc),
            cell(g.fr_q_vs_level.plcc),
            cell(g.nr_q_vs_fr_q.as_ref().and_then(|c| c.srocc)),
            cell(g.nr_q_vs_fr_q.as_ref().and_then(|c| c.plcc)),
            cell(g.nr_q_vs_level.as_ref().and_then(|c| c.srocc)),
            cell(g.weqa_vs_ssim_map.mean_pearson),
            cell(g.nr_vs_fr_map.as_ref().and_then(|m| m.mean_pearson)),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, w))| {
                if i == 0 {
                    format!("{s:<w$}")
                } else {
                    format!("{s:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    if !report.failures.is_empty() {
        let _ = writeln!(out, "{} entries failed", report.failures.len());
    }
    out
}
