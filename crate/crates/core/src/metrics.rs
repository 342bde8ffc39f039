//! Per-class precision / recall / F1 and overall accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column used in the confusion matrix for predictions outside the set of
/// true labels.
pub const UNKNOWN_LABEL: &str = "<unknown>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub total: usize,
    /// Row labels: the true classes, sorted.
    pub labels: Vec<String>,
    /// Column labels: `labels`, plus [`UNKNOWN_LABEL`] when some prediction
    /// is not a true class.
    pub predicted_labels: Vec<String>,
    /// `confusion[t][p]` counts true class `labels[t]` predicted as
    /// `predicted_labels[p]`.
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Builds the report. Zero denominators give 0, as does F1 when precision
/// and recall are both 0.
pub fn evaluate<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no (true, predicted) pairs".into()));
    }
    let labels: Vec<String> = pairs
        .iter()
        .map(|(t, _)| t.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let k = labels.len();
    let has_unknown = pairs.iter().any(|(_, p)| !index.contains_key(p.as_ref()));
    let cols = k + usize::from(has_unknown);
    let mut confusion = vec![vec![0usize; cols]; k];
    for (t, p) in pairs {
        let ti = index[t.as_ref()];
        let pi = index.get(p.as_ref()).copied().unwrap_or(k);
        confusion[ti][pi] += 1;
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let classes = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let tp = confusion[i][i];
            let support: usize = confusion[i].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[i]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                label: label.clone(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let mut predicted_labels = labels.clone();
    if has_unknown {
        predicted_labels.push(UNKNOWN_LABEL.to_string());
    }
    Ok(EvalReport {
        classes,
        accuracy: ratio(correct, pairs.len()),
        total: pairs.len(),
        labels,
        predicted_labels,
        confusion,
    })
}

impl EvalReport {
    /// Aligned text table: class, precision, recall, F1 with two decimals,
    /// followed by the accuracy line.
    pub fn to_table(&self) -> String {
        let width = self
            .classes
            .iter()
            .map(|c| c.label.len())
            .chain(["Class".len()])
            .max()
            .unwrap_or(5);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<width$}  {:>9}  {:>6}  {:>8}  {:>7}",
            "Class", "Precision", "Recall", "F1-score", "Support"
        );
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<width$}  {:>9.2}  {:>6.2}  {:>8.2}  {:>7}",
                c.label, c.precision, c.recall, c.f1, c.support
            );
        }
        let _ = writeln!(s, "Accuracy {:.2} ({} samples)", self.accuracy, self.total);
        s
    }
}

/// Reads `true,pred` rows (with that header).
pub fn read_pairs_csv(reader: impl Read) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse("metrics csv", e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["true", "pred"] {
        return Err(Error::parse("metrics csv", "header must be `true,pred`"));
    }
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| Error::parse("metrics csv", e.to_string()))?;
            Ok((r[0].to_string(), r[1].to_string()))
        })
        .collect()
}
