//! The `finegrain` command line: corpus-scale, seeded pipelines over
//! `finegrain-core`.
//!
//! Every image subcommand derives one seed per input from the root seed
//! and the input's position, so results do not depend on thread count or
//! scheduling.

pub mod args;
pub mod commands;
pub mod config;
pub mod ops;
pub mod runner;

use std::io::Write;

use anyhow::{anyhow, Result};

use args::{Cli, Command, Io};
use config::{PipelineConfig, RunSettings};

/// Runs one invocation. Returns `false` when some items failed; hard
/// errors (bad config, unreadable inputs lists) come back as `Err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let config = PipelineConfig::load_or_default(cli.global.config.as_deref())?;
    let settings = |io: &Io| RunSettings::resolve(&config, &cli.global.overrides(io));
    let seed = || {
        cli.global
            .seed
            .or(config.seed)
            .ok_or_else(|| anyhow!("a seed is required (--seed or `seed` in the config)"))
    };
    let emit = |out: &mut dyn Write, json: String| -> Result<()> {
        writeln!(out, "{json}")?;
        Ok(())
    };
    match &cli.command {
        Command::Augment { op, io } => {
            let op = commands::resolve_augment_op(op.as_deref(), &config)?;
            Ok(commands::augment(&op, &settings(io)?)?.success())
        }
        Command::Pair { variant, io } => {
            let variant = commands::resolve_pair_variant(variant.as_deref(), &config)?;
            Ok(commands::pair(&variant, &settings(io)?)?.success())
        }
        Command::Permset { count, pool, output } => {
            let file = commands::permset(*count, *pool, seed()?)?;
            let json = serde_json::to_string_pretty(&file)?;
            match output {
                Some(path) => runner::write_atomic(path, format!("{json}\n").as_bytes())?,
                None => emit(out, json)?,
            }
            Ok(true)
        }
        Command::Jigsaw { perms, io } => {
            let set = commands::load_permset(perms)?;
            Ok(commands::jigsaw(&set, &settings(io)?)?.success())
        }
        Command::Smartcrop { io } => Ok(commands::smartcrop(&settings(io)?)?.success()),
        Command::Split {
            manifest,
            train_fraction,
            output,
        } => {
            let summary = commands::split(manifest, *train_fraction, seed()?, output)?;
            emit(out, serde_json::to_string_pretty(&summary)?)?;
            Ok(true)
        }
        Command::ClassWeights { manifest } => {
            emit(out, commands::class_weights_json(manifest)?)?;
            Ok(true)
        }
        Command::Metrics { pairs, output } => {
            commands::metrics(pairs, output.as_deref(), out, err)?;
            Ok(true)
        }
        Command::Ntxent { embeddings, tau } => {
            emit(out, commands::ntxent_json(embeddings, *tau)?)?;
            Ok(true)
        }
        Command::SrLoss {
            hr,
            sr,
            scale,
            adversarial,
            channel_norm,
        } => {
            let report = commands::sr_loss(hr, sr, *scale, *adversarial, *channel_norm)?;
            emit(out, serde_json::to_string_pretty(&report)?)?;
            Ok(true)
        }
        Command::PixelShuffle {
            input,
            scale,
            inverse,
            output,
        } => {
            let csv = commands::pixel_shuffle_csv(input, *scale, *inverse)?;
            match output {
                Some(path) => runner::write_atomic(path, &csv)?,
                None => out.write_all(&csv)?,
            }
            Ok(true)
        }
    }
}
