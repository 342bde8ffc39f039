use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finegrain_core::sr::ChannelNorm;

use crate::config::{Overrides, Size};

#[derive(Debug, Parser)]
#[command(name = "finegrain", version, about = "Seeded augmentation and pretext-task pipelines")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct GlobalArgs {
    /// Root seed; every item gets its own seed derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration. Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Resize every image to WIDTHxHEIGHT before processing.
    #[arg(long, global = true, value_name = "WxH")]
    pub resize: Option<Size>,
    /// Center-crop every image so both sides are multiples of N.
    #[arg(long, global = true, value_name = "N")]
    pub crop_divisible: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Io {
    /// Image file, directory of images, or CSV manifest.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn overrides(&self, io: &Io) -> Overrides {
        Overrides {
            seed: self.seed,
            resize: self.resize,
            crop_divisible: self.crop_divisible,
            jobs: self.jobs,
            input: io.input.clone(),
            output: io.output.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Mean,
    Sum,
}

impl From<NormArg> for ChannelNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Mean => ChannelNorm::Mean,
            NormArg::Sum => ChannelNorm::Sum,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one augmentation to every input image.
    Augment {
        /// gamma, coarse-dropout, patch-swap, random-jigsaw, dcl,
        /// smartcrop-overlay or smartcrop-shuffle.
        #[arg(long)]
        op: Option<String>,
        #[command(flatten)]
        io: Io,
    },
    /// Emit two views per image under a/ and b/.
    Pair {
        /// original+gamma, original+dcl, original+random-jigsaw,
        /// jigsaw4x4+jigsaw2x2, original+patchswap, original+coarsedropout
        /// or original+smartcrop-overlay.
        #[arg(long)]
        variant: Option<String>,
        #[command(flatten)]
        io: Io,
    },
    /// Build a Hamming-separated set of 3x3 tile permutations.
    Permset {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Random candidates per greedy step; 0 searches all 9! permutations.
        #[arg(long, default_value_t = finegrain_core::permset::DEFAULT_CANDIDATE_POOL)]
        pool: usize,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cut every image into 3x3 tiles ordered by a random set permutation.
    Jigsaw {
        /// Permutation set written by `permset`.
        #[arg(long)]
        perms: PathBuf,
        #[command(flatten)]
        io: Io,
    },
    /// Find the salient square crop and write it with a white overlay.
    Smartcrop {
        #[command(flatten)]
        io: Io,
    },
    /// Tag manifest entries train/val per class.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Where to write the tagged manifest CSV.
        #[arg(long)]
        output: PathBuf,
    },
    /// Balanced inverse-frequency class weights.
    ClassWeights {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Precision / recall / F1 from a `true,pred` CSV.
    Metrics {
        #[arg(long)]
        pairs: PathBuf,
        /// Write report.json and report.txt here instead of stdout/stderr.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// NT-Xent loss of a CSV of embeddings, positive pairs on adjacent rows.
    Ntxent {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
    },
    /// Content and perceptual losses between two tensor CSVs.
    SrLoss {
        #[arg(long)]
        hr: PathBuf,
        #[arg(long)]
        sr: PathBuf,
        #[arg(long)]
        scale: usize,
        #[arg(long, default_value_t = 0.0)]
        adversarial: f64,
        /// Channel handling for both losses. Default: mean for the pixel
        /// loss, sum for the feature loss.
        #[arg(long, value_enum)]
        channel_norm: Option<NormArg>,
    },
    /// Depth-to-space (or the inverse) on a tensor CSV.
    PixelShuffle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        scale: usize,
        #[arg(long)]
        inverse: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}
