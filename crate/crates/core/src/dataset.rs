//! Labeled corpus manifests, stratified splits and class weights.
//!
//! Manifest CSV: header `path,label[,split]`, UTF-8, one entry per line.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            other => Err(Error::parse("manifest", format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl ManifestEntry {
    pub fn new(path: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            label: label.into(),
            split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.label.is_empty() {
                return Err(Error::parse("manifest", format!("empty label for `{}`", e.path)));
            }
            if !seen.insert(e.path.as_str()) {
                return Err(Error::parse("manifest", format!("duplicate path `{}`", e.path)));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry indices per label, labels in sorted order.
    pub fn by_label(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            groups.entry(e.label.as_str()).or_default().push(i);
        }
        groups
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == Some(split)).count()
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse("manifest", e.to_string()))?
            .clone();
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["path", "label"] && cols != ["path", "label", "split"] {
            return Err(Error::parse(
                "manifest",
                format!("header must be `path,label[,split]`, got `{}`", cols.join(",")),
            ));
        }
        let mut entries = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::parse("manifest", e.to_string()))?;
            let split = match record.get(2) {
                None | Some("") => None,
                Some(s) => Some(s.parse()?),
            };
            entries.push(ManifestEntry {
                path: record[0].to_string(),
                label: record[1].to_string(),
                split,
            });
        }
        Self::new(entries)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let with_split = self.entries.iter().any(|e| e.split.is_some());
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let csv_err = |e: csv::Error| Error::parse("manifest", e.to_string());
        if with_split {
            w.write_record(["path", "label", "split"]).map_err(csv_err)?;
        } else {
            w.write_record(["path", "label"]).map_err(csv_err)?;
        }
        for e in &self.entries {
            if with_split {
                let split = e.split.map(|s| s.to_string()).unwrap_or_default();
                w.write_record([e.path.as_str(), e.label.as_str(), split.as_str()])
                    .map_err(csv_err)?;
            } else {
                w.write_record([e.path.as_str(), e.label.as_str()])
                    .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::parse("manifest", e.to_string()))
    }
}

/// Number of training entries for a class of `n` entries.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    // The epsilon absorbs representation error, e.g. 0.29 * 100.
    let raw = (train_fraction * n as f64 + 1e-9).floor() as usize;
    raw.clamp(1, n - 1)
}

/// Per class, tags `train_count(n_c)` uniformly chosen entries `train` and
/// the rest `val`. Classes are processed in sorted label order.
pub fn stratified_split<R: RandomSource + ?Sized>(
    manifest: &Manifest,
    train_fraction: f64,
    rng: &mut R,
) -> Result<Manifest> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut entries = manifest.entries.clone();
    for (label, mut idx) in manifest.by_label() {
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                count: idx.len(),
            });
        }
        rng.shuffle(&mut idx);
        let n_train = train_count(idx.len(), train_fraction);
        for (rank, &i) in idx.iter().enumerate() {
            entries[i].split = Some(if rank < n_train { Split::Train } else { Split::Val });
        }
    }
    Ok(Manifest { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub weights: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, usize>,
}

/// Balanced inverse frequency `N / (K * n_c)`.
pub fn class_weights(manifest: &Manifest) -> Result<ClassWeights> {
    if manifest.is_empty() {
        return Err(Error::EmptyInput("manifest has no entries".into()));
    }
    let groups = manifest.by_label();
    let n = manifest.len() as f64;
    let k = groups.len() as f64;
    let counts: BTreeMap<String, usize> = groups
        .iter()
        .map(|(l, idx)| (l.to_string(), idx.len()))
        .collect();
    let weights = counts
        .iter()
        .map(|(l, &c)| (l.clone(), n / (k * c as f64)))
        .collect();
    Ok(ClassWeights { weights, counts })
}
