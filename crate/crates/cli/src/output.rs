//! Output files: refuse to overwrite without `--force`, write through a
//! temporary file in the target directory and rename into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use iqa_core::fr::DistortionMap;
use iqa_core::imgio::{encode_plane, ImagePlane};

use crate::error::invalid;

#[derive(Debug, Clone, Copy)]
pub struct Outputs {
    pub force: bool,
}

impl Outputs {
    /// Fail early if any target already exists.
    pub fn check<'a>(&self, paths: impl IntoIterator<Item = &'a Path>) -> anyhow::Result<()> {
        if self.force {
            return Ok(());
        }
        for p in paths {
            if p.exists() {
                return Err(invalid(format!(
                    "{} exists (use --force to overwrite)",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
        self.check([path])?;
        Ok(self.write_core(path, bytes)?)
    }

    /// [`Outputs::write`] with the library's error type, for use as a sink
    /// inside library calls.
    pub fn write_core(&self, path: &Path, bytes: &[u8]) -> iqa_core::Result<()> {
        if !self.force && path.exists() {
            return Err(iqa_core::Error::InvalidConfig(format!(
                "{} exists (use --force to overwrite)",
                path.display()
            )));
        }
        let io = |e: std::io::Error| iqa_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&dir).map_err(io)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }
}

fn is_raster(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("png" | "pgm")
    )
}

/// Range of the values behind an 8-bit map export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MapRange {
    pub min: f64,
    pub max: f64,
}

/// `.png`/`.pgm` targets get the map affinely stretched to 0..255; any
/// other extension gets the raw float format.
pub fn encode_map(map: &DistortionMap<f64>, path: &Path) -> anyhow::Result<(Vec<u8>, MapRange)> {
    let (lo, hi) = map.min_max();
    let range = MapRange { min: lo, max: hi };
    if is_raster(path) {
        let (plane, _, _) = map.normalized();
        Ok((encode_plane(&plane, path)?, range))
    } else {
        Ok((map.to_raw_bytes(), range))
    }
}

/// SSIM maps are exported as `1 - ssim`, clamped at zero.
pub fn ssim_distortion(ssim_map: &ImagePlane<f64>) -> anyhow::Result<DistortionMap<f64>> {
    Ok(DistortionMap::new(ssim_map.map(|v| (1.0 - v).max(0.0)))?)
}
