//! Subcommand bodies.

use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use finegrain_core::contrastive::{nt_xent_report, EmbeddingBatch, Temperature};
use finegrain_core::dataset::{class_weights, stratified_split, Manifest, Split};
use finegrain_core::grid::split_cells;
use finegrain_core::metrics::{evaluate, read_pairs_csv};
use finegrain_core::permset::{generate_permutation_set, make_jigsaw_sample, CandidatePool, PermutationSet};
use finegrain_core::smartcrop::{overlay_on_white, smart_crop_with};
use finegrain_core::sr::{
    feature_content_loss, mse_content_loss, perceptual_loss, pixel_shuffle, pixel_unshuffle, ChannelNorm,
    Tensor3, UpscaleFactor,
};
use finegrain_core::Rng;
use serde::{Deserialize, Serialize};

use crate::args::NormArg;
use crate::config::{PipelineConfig, RunSettings};
use crate::ops::{AugmentOp, PairVariant, View};
use crate::runner::{run_items, with_suffix, write_atomic, OutputFile, RunReport};

fn view_files(dir: &Path, name: &Path, view: &View) -> Result<Vec<OutputFile>> {
    let base = dir.join(name);
    let mut files = vec![OutputFile::png(base.with_extension("png"), &view.image)?];
    if let Some(perm) = &view.permutation {
        files.push(OutputFile::json(with_suffix(&base, ".perm.json"), perm)?);
    }
    if let Some(crop) = &view.crop {
        files.push(OutputFile::json(with_suffix(&base, ".crop.json"), crop)?);
    }
    Ok(files)
}

fn operation_name(flag: Option<&str>, config: &PipelineConfig, what: &str) -> Result<String> {
    flag.map(str::to_string)
        .or_else(|| config.operation.as_ref().map(|op| op.name.clone()))
        .ok_or_else(|| anyhow!("no {what} given (flag or `operation.name` in the config)"))
}

pub fn augment(op: &str, settings: &RunSettings) -> Result<RunReport> {
    let op: AugmentOp = op.parse().map_err(|e: String| anyhow!(e))?;
    run_items("augment", op.name(), settings, |item, img, seed| {
        let view = op.apply(img, &settings.params, &mut Rng::new(seed))?;
        view_files(Path::new(""), &item.name, &view)
    })
}

/// The two views draw from `derive(item_seed, 0)` and `derive(item_seed, 1)`.
pub fn pair(variant: &str, settings: &RunSettings) -> Result<RunReport> {
    let variant: PairVariant = variant.parse().map_err(|e: String| anyhow!(e))?;
    run_items("pair", variant.name(), settings, |item, img, seed| {
        let (a, b) = variant.apply(
            img,
            &settings.params,
            &mut Rng::derive(seed, 0),
            &mut Rng::derive(seed, 1),
        )?;
        let mut files = view_files(Path::new("a"), &item.name, &a)?;
        files.extend(view_files(Path::new("b"), &item.name, &b)?);
        Ok(files)
    })
}

pub fn resolve_augment_op(flag: Option<&str>, config: &PipelineConfig) -> Result<String> {
    operation_name(flag, config, "operation")
}

pub fn resolve_pair_variant(flag: Option<&str>, config: &PipelineConfig) -> Result<String> {
    operation_name(flag, config, "pair variant")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PermsetFile {
    pub seed: u64,
    /// 0 when every permutation was a candidate.
    pub candidate_pool: usize,
    #[serde(flatten)]
    pub set: PermutationSet,
}

pub fn permset(count: usize, pool: usize, seed: u64) -> Result<PermsetFile> {
    let set = generate_permutation_set(count, CandidatePool::from_size(pool), &mut Rng::new(seed))?;
    Ok(PermsetFile {
        seed,
        candidate_pool: pool,
        set,
    })
}

pub fn load_permset(path: &Path) -> Result<PermutationSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: PermsetFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // Statistics are recomputed rather than trusted.
    Ok(PermutationSet::from_perms(file.set.perms)?)
}

#[derive(Debug, Serialize)]
struct JigsawLabel<'a> {
    label: usize,
    permutation: &'a [u8],
}

/// Per item: `<stem>/tile_<pos>.png` for positions 0..9 and `<stem>/label.json`.
pub fn jigsaw(set: &PermutationSet, settings: &RunSettings) -> Result<RunReport> {
    run_items("jigsaw", "jigsaw-tiles", settings, |item, img, seed| {
        split_cells(img, 3)?;
        let sample = make_jigsaw_sample(img, set, &mut Rng::new(seed))?;
        let dir = item.name.with_extension("");
        let mut files = sample
            .tiles
            .iter()
            .enumerate()
            .map(|(pos, tile)| OutputFile::png(dir.join(format!("tile_{pos}.png")), tile))
            .collect::<Result<Vec<_>>>()?;
        files.push(OutputFile::json(
            dir.join("label.json"),
            &JigsawLabel {
                label: sample.label,
                permutation: &set.perms[sample.label],
            },
        )?);
        Ok(files)
    })
}

/// Per item: the white overlay as `<stem>.png` and the rectangle as `<stem>.crop.json`.
pub fn smartcrop(settings: &RunSettings) -> Result<RunReport> {
    run_items("smartcrop", "smartcrop", settings, |item, img, _| {
        let crop = smart_crop_with(img, &settings.params.smartcrop)?;
        Ok(vec![
            OutputFile::png(item.name.with_extension("png"), &overlay_on_white(img, &crop)?)?,
            OutputFile::json(with_suffix(&item.name, ".crop.json"), &crop)?,
        ])
    })
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Manifest::read_csv(file)?)
}

#[derive(Debug, Serialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub train_fraction: f64,
    pub train: usize,
    pub val: usize,
}

pub fn split(manifest: &Path, fraction: f64, seed: u64, output: &Path) -> Result<SplitSummary> {
    let tagged = stratified_split(&read_manifest(manifest)?, fraction, &mut Rng::new(seed))?;
    let mut buf = Vec::new();
    tagged.write_csv(&mut buf)?;
    write_atomic(output, &buf)?;
    Ok(SplitSummary {
        seed,
        train_fraction: fraction,
        train: tagged.count(Split::Train),
        val: tagged.count(Split::Val),
    })
}

pub fn class_weights_json(manifest: &Path) -> Result<String> {
    Ok(serde_json::to_string_pretty(&class_weights(&read_manifest(manifest)?)?)?)
}

/// JSON report and text table. With `output` both go to files there,
/// otherwise JSON to `out` and the table to `err`.
pub fn metrics(pairs: &Path, output: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let file = fs::File::open(pairs).with_context(|| format!("opening {}", pairs.display()))?;
    let report = evaluate(&read_pairs_csv(file)?)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    let table = report.to_table();
    match output {
        Some(dir) => {
            write_atomic(&dir.join("report.json"), json.as_bytes())?;
            write_atomic(&dir.join("report.txt"), table.as_bytes())?;
        }
        None => {
            out.write_all(json.as_bytes())?;
            err.write_all(table.as_bytes())?;
        }
    }
    Ok(())
}

/// One embedding per row. A first row that does not parse as numbers is
/// taken as a header and skipped.
pub fn read_embeddings(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(anyhow!("{}: row {}: {e}", path.display(), i + 1)),
        }
    }
    Ok(rows)
}

pub fn ntxent_json(embeddings: &Path, tau: f64) -> Result<String> {
    let batch = EmbeddingBatch::new(read_embeddings(embeddings)?)?;
    let report = nt_xent_report(&batch, Temperature::new(tau)?);
    Ok(serde_json::to_string_pretty(&report)?)
}

fn read_tensor(path: &Path) -> Result<Tensor3> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Tensor3::read_csv(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct SrLossReport {
    pub scale: usize,
    pub lr_width: usize,
    pub lr_height: usize,
    pub pixel_channel_norm: ChannelNorm,
    pub feature_channel_norm: ChannelNorm,
    pub pixel_content: f64,
    pub feature_content: f64,
    pub adversarial: f64,
    pub perceptual_pixel: f64,
    pub perceptual_feature: f64,
}

pub fn sr_loss(hr: &Path, sr: &Path, scale: usize, adversarial: f64, norm: Option<NormArg>) -> Result<SrLossReport> {
    let (hr, sr) = (read_tensor(hr)?, read_tensor(sr)?);
    let r = UpscaleFactor::new(scale)?;
    for (dimension, size) in [("width", hr.width()), ("height", hr.height())] {
        if size % scale != 0 {
            return Err(finegrain_core::Error::NotDivisible {
                dimension,
                size,
                divisor: scale,
            }
            .into());
        }
    }
    let (lr_width, lr_height) = (hr.width() / scale, hr.height() / scale);
    let pixel_norm = norm.map_or(ChannelNorm::Mean, ChannelNorm::from);
    let feature_norm = norm.map_or(ChannelNorm::Sum, ChannelNorm::from);
    let pixel_content = mse_content_loss(&hr, &sr, r, lr_width, lr_height, pixel_norm)?;
    let feature_content = feature_content_loss(&hr, &sr, feature_norm)?;
    Ok(SrLossReport {
        scale,
        lr_width,
        lr_height,
        pixel_channel_norm: pixel_norm,
        feature_channel_norm: feature_norm,
        pixel_content,
        feature_content,
        adversarial,
        perceptual_pixel: perceptual_loss(pixel_content, adversarial),
        perceptual_feature: perceptual_loss(feature_content, adversarial),
    })
}

pub fn pixel_shuffle_csv(input: &Path, scale: usize, inverse: bool) -> Result<Vec<u8>> {
    let t = read_tensor(input)?;
    let r = UpscaleFactor::new(scale)?;
    let out = if inverse { pixel_unshuffle(&t, r)? } else { pixel_shuffle(&t, r)? };
    let mut buf = Vec::new();
    out.write_csv(&mut buf)?;
    Ok(buf)
}
