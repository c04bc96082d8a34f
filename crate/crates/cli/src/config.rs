//! Run configuration: built-in defaults, overridden by a JSON config file,
//! overridden by flags.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use iqa_core::descriptors::SamplingPolicy;
use iqa_core::fr::FrConfig;
use iqa_core::learn::ForestConfig;
use iqa_core::wavelet::WaveletConfig;

use crate::error::invalid;

pub const SEED_ENV: &str = "IQA_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrSection {
    pub g_sigma: f64,
}

impl Default for FrSection {
    fn default() -> Self {
        Self { g_sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub lambda: f64,
    /// Pixel stride for image signatures.
    pub stride: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            stride: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub wavelet: WaveletConfig,
    pub fr: FrSection,
    pub sampling: SamplingPolicy,
    pub forest: ForestConfig,
    pub kernel: KernelSection,
    /// Master seed; it replaces `sampling.seed` and `forest.seed`.
    pub seed: Option<u64>,
    /// Prediction stride for `nr`.
    pub stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletConfig::default(),
            fr: FrSection::default(),
            sampling: SamplingPolicy::default(),
            forest: ForestConfig::default(),
            kernel: KernelSection::default(),
            seed: None,
            stride: 2,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }

    /// Seed precedence: flag, config file, `IQA_SEED`, zero.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> anyhow::Result<u64> {
        let seed = match flag.or(self.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?,
                Err(_) => 0,
            },
        };
        self.seed = Some(seed);
        self.sampling.seed = seed;
        self.forest.seed = seed;
        Ok(seed)
    }

    pub fn fr_config(&self) -> FrConfig {
        FrConfig {
            wavelet: self.wavelet,
            g_sigma: self.fr.g_sigma,
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"forest": {"n_trees": 7}, "stride": 1}"#).unwrap();
        assert_eq!(c.forest.n_trees, 7);
        assert_eq!(c.forest.min_leaf, 5);
        assert_eq!(c.stride, 1);
        assert_eq!(c.sampling.per_image, 2000);
    }

    #[test]
    fn unknown_top_level_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"strides": 1}"#).is_err());
    }

    #[test]
    fn flag_seed_wins() {
        let mut c = RunConfig {
            seed: Some(4),
            ..Default::default()
        };
        assert_eq!(c.resolve_seed(Some(9)).unwrap(), 9);
        assert_eq!((c.sampling.seed, c.forest.seed), (9, 9));
        let mut c = RunConfig {
            seed: Some(4),
            ..Default::default()
        };
        assert_eq!(c.resolve_seed(None).unwrap(), 4);
    }

    #[test]
    fn round_trips() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_value(c.echo()).unwrap();
        assert_eq!(back, c);
    }
}
