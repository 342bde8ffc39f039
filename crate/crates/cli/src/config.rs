//! Run configuration: a JSON file merged with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use finegrain_core::augment::{DclParams, DropoutParams, GammaParams, PatchSwapParams};
use finegrain_core::smartcrop::SmartcropConfig;
use serde::{Deserialize, Serialize};

/// `WIDTHxHEIGHT`, e.g. `224x224`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("`{v}` is not a positive integer in `{s}`"))
        };
        Ok(Size {
            width: parse(w)?,
            height: parse(h)?,
        })
    }
}

impl TryFrom<String> for Size {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Size> for String {
    fn from(s: Size) -> String {
        s.to_string()
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Parameters for every image operation. Each operation reads only its
/// own section; omitted sections take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpParams {
    pub gamma: GammaParams,
    pub dropout: DropoutParams,
    pub patch_swap: PatchSwapParams,
    pub dcl: DclParams,
    /// Grid size for `random-jigsaw` and `smartcrop-shuffle`.
    pub jigsaw_n: usize,
    pub smartcrop: SmartcropConfig,
}

impl Default for OpParams {
    fn default() -> Self {
        Self {
            gamma: GammaParams::default(),
            dropout: DropoutParams::default(),
            patch_swap: PatchSwapParams::default(),
            dcl: DclParams::default(),
            jigsaw_n: 4,
            smartcrop: SmartcropConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operation {
    pub name: String,
    #[serde(default)]
    pub params: OpParams,
}

/// The on-disk config. Everything is optional here; [`RunSettings`]
/// enforces what a run needs after flags are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub resize: Option<Size>,
    /// Center-crop each image so both sides are multiples of this.
    pub crop_divisible: Option<usize>,
    pub jobs: Option<usize>,
    pub operation: Option<Operation>,
    /// An image file, a directory of images, or a `.csv` manifest.
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// Values shared by every subcommand that walks a corpus.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub seed: u64,
    pub resize: Option<Size>,
    pub crop_divisible: Option<usize>,
    pub jobs: usize,
    pub params: OpParams,
    pub input: PathBuf,
    pub output: PathBuf,
}

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub resize: Option<Size>,
    pub crop_divisible: Option<usize>,
    pub jobs: Option<usize>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunSettings {
    pub fn resolve(config: &PipelineConfig, flags: &Overrides) -> Result<Self> {
        let Some(seed) = flags.seed.or(config.seed) else {
            bail!("a seed is required (--seed or `seed` in the config)");
        };
        let Some(input) = flags.input.clone().or_else(|| config.input.clone()) else {
            bail!("an input is required (--input or `input` in the config)");
        };
        let Some(output) = flags.output.clone().or_else(|| config.output.clone()) else {
            bail!("an output directory is required (--output or `output` in the config)");
        };
        let crop_divisible = flags.crop_divisible.or(config.crop_divisible);
        if crop_divisible == Some(0) {
            bail!("crop-divisible must be at least 1");
        }
        Ok(Self {
            seed,
            resize: flags.resize.or(config.resize),
            crop_divisible,
            jobs: flags.jobs.or(config.jobs).unwrap_or(0),
            params: config
                .operation
                .as_ref()
                .map(|op| op.params.clone())
                .unwrap_or_default(),
            input,
            output,
        })
    }
}
