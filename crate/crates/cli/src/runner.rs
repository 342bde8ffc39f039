//! Corpus walking, per-item seeding, parallel execution and the run report.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use finegrain_core::dataset::Manifest;
use finegrain_core::image::encode_png;
use finegrain_core::resample::resize;
use finegrain_core::rng::derive_seed;
use finegrain_core::{load_image, ImageBuffer};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunSettings;

pub const REPORT_FILE: &str = "report.json";

/// One input image and the relative name its outputs are derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub index: usize,
    pub source: PathBuf,
    pub name: PathBuf,
}

/// A file produced for one item, relative to the output root.
#[derive(Debug, Clone)]
pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn png(path: PathBuf, img: &ImageBuffer) -> Result<Self> {
        Ok(Self {
            path,
            bytes: encode_png(img)?,
        })
    }

    pub fn json<T: Serialize>(path: PathBuf, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec(value)?;
        bytes.push(b'\n');
        Ok(Self { path, bytes })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub index: usize,
    pub input: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub operation: String,
    pub seed: u64,
    pub items: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub elapsed_ms: u64,
    pub entries: Vec<ItemReport>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failed == 0
    }
}

/// Keeps only the plain components of `p`, so outputs never escape the
/// output directory.
fn relative_name(p: &Path) -> PathBuf {
    p.components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s),
            _ => None,
        })
        .collect()
}

fn is_image_path(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("ppm"))
}

/// Expands the input into items: a `.csv` manifest (paths relative to the
/// manifest's directory), a directory (its image files, sorted by name),
/// or a single image.
pub fn collect_inputs(input: &Path) -> Result<Vec<Item>> {
    let pairs: Vec<(PathBuf, PathBuf)> = if input.is_dir() {
        let mut names: Vec<PathBuf> = fs::read_dir(input)
            .with_context(|| format!("listing {}", input.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        names.retain(|p| p.is_file() && is_image_path(p));
        names.sort();
        names
            .into_iter()
            .map(|p| {
                let name = PathBuf::from(p.file_name().expect("listed file has a name"));
                (p, name)
            })
            .collect()
    } else if input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
        let manifest = Manifest::read_csv(file)?;
        let base = input.parent().unwrap_or(Path::new(""));
        manifest
            .entries()
            .iter()
            .map(|e| (base.join(&e.path), relative_name(Path::new(&e.path))))
            .collect()
    } else if input.is_file() {
        let name = PathBuf::from(input.file_name().context("input has no file name")?);
        vec![(input.to_path_buf(), name)]
    } else {
        bail!("input {} does not exist", input.display());
    };
    let mut seen = BTreeSet::new();
    for (_, name) in &pairs {
        if !seen.insert(name.with_extension("")) {
            bail!("two inputs map to the same output name `{}`", name.display());
        }
    }
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(index, (source, name))| Item {
            index,
            source,
            name,
        })
        .collect())
}

/// Loads an item and applies the shared geometry steps: resize, then
/// center-crop to a multiple.
pub fn prepare_image(path: &Path, settings: &RunSettings) -> Result<ImageBuffer> {
    let mut img = load_image(path)?;
    if let Some(size) = settings.resize {
        img = resize(&img, size.width, size.height)?;
    }
    if let Some(n) = settings.crop_divisible {
        img = img.center_crop_to_multiple(n)?;
    }
    Ok(img)
}

/// `path` with its extension replaced by `suffix`, e.g. `a/x.png` + `.perm.json`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Write-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn display_path(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Runs `work(item, image, item_seed)` over every input on a pool of
/// `settings.jobs` threads (0 = one per core), writes the returned files
/// under the output directory and finishes with `report.json`.
pub fn run_items<F>(command: &str, operation: &str, settings: &RunSettings, work: F) -> Result<RunReport>
where
    F: Fn(&Item, &ImageBuffer, u64) -> Result<Vec<OutputFile>> + Sync,
{
    let start = Instant::now();
    let items = collect_inputs(&settings.input)?;
    fs::create_dir_all(&settings.output)
        .with_context(|| format!("creating {}", settings.output.display()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .context("starting worker pool")?;
    let total = items.len();
    let entries: Vec<ItemReport> = pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let seed = derive_seed(settings.seed, item.index as u64);
                let result = prepare_image(&item.source, settings)
                    .and_then(|img| work(item, &img, seed))
                    .and_then(|files| {
                        for f in &files {
                            write_atomic(&settings.output.join(&f.path), &f.bytes)?;
                        }
                        Ok(files.iter().map(|f| display_path(&f.path)).collect())
                    });
                let input = display_path(&item.name);
                match &result {
                    Ok(_) => eprintln!("[{}/{total}] {input}: ok", item.index + 1),
                    Err(e) => eprintln!("[{}/{total}] {input}: error: {e:#}", item.index + 1),
                }
                let (outputs, error) = match result {
                    Ok(outputs) => (outputs, None),
                    Err(e) => (Vec::new(), Some(format!("{e:#}"))),
                };
                ItemReport {
                    index: item.index,
                    input,
                    seed,
                    outputs,
                    error,
                }
            })
            .collect()
    });
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    let report = RunReport {
        command: command.to_string(),
        operation: operation.to_string(),
        seed: settings.seed,
        items: total,
        succeeded: total - failed,
        failed,
        elapsed_ms: start.elapsed().as_millis() as u64,
        entries,
    };
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write_atomic(&settings.output.join(REPORT_FILE), &bytes)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_stay_inside_output() {
        assert_eq!(relative_name(Path::new("/abs/../x/y.png")), PathBuf::from("abs/x/y.png"));
        assert_eq!(with_suffix(Path::new("a/x.png"), ".perm.json"), PathBuf::from("a/x.perm.json"));
    }

    #[test]
    fn directory_inputs_are_sorted_images() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.PNG", "notes.txt", "c.ppm"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        let items = collect_inputs(dir.path()).unwrap();
        let names: Vec<_> = items.iter().map(|i| i.name.to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["a.PNG", "b.png", "c.ppm"]);
        assert_eq!(items[2].index, 2);
    }

    #[test]
    fn colliding_names_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.png", "a.ppm"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        assert!(collect_inputs(dir.path()).is_err());
    }
}
