//! NT-Xent (normalized temperature-scaled cross entropy) over a batch of
//! positive pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `2N` rows of dimension `D`; rows `2m` and `2m + 1` are the positive pair
/// for item `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl EmbeddingBatch {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || !rows.len().is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "embedding batch needs a positive even row count, got {}",
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::InvalidParam("embedding dimension is zero".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} values, expected {dim}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParam(format!("row {i} is not finite")));
            }
            if norm(r) == 0.0 {
                return Err(Error::ZeroNorm { row: i });
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn pairs(&self) -> usize {
        self.rows.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn normalized(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let n = norm(r);
                r.iter().map(|v| v / n).collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau.is_finite() {
            Ok(Self(tau))
        } else {
            Err(Error::InvalidParam(format!(
                "temperature must be positive, got {tau}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Temperature {
    fn default() -> Self {
        Self(0.5)
    }
}

impl TryFrom<f64> for Temperature {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        Self::new(tau)
    }
}

impl From<Temperature> for f64 {
    fn from(t: Temperature) -> f64 {
        t.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 {
        return Err(Error::ZeroNorm { row: 0 });
    }
    if nb == 0.0 {
        return Err(Error::ZeroNorm { row: 1 });
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `-log(exp(s_ij) / sum_{k != i} exp(s_ik))` on unit rows, with
/// `s = cos / tau` shifted by the row max before exponentiation.
fn pair_loss_unit(unit: &[Vec<f64>], i: usize, j: usize, tau: f64) -> f64 {
    let zi = &unit[i];
    let logits: Vec<f64> = unit
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, zk)| dot(zi, zk).clamp(-1.0, 1.0) / tau)
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    let positive = dot(zi, &unit[j]).clamp(-1.0, 1.0) / tau;
    (lse - positive).max(0.0)
}

/// Loss for the ordered pair `(i, j)`. The denominator runs over every row
/// except `i`, so it includes the positive term.
pub fn nt_xent_pair_loss(
    batch: &EmbeddingBatch,
    i: usize,
    j: usize,
    tau: Temperature,
) -> Result<f64> {
    let len = batch.rows.len();
    for index in [i, j] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    if i == j {
        return Err(Error::InvalidParam(format!(
            "anchor and positive are both row {i}"
        )));
    }
    Ok(pair_loss_unit(&batch.normalized(), i, j, tau.get()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtXentReport {
    pub tau: f64,
    pub pairs: usize,
    pub dim: usize,
    pub batch_loss: f64,
    /// `(l(2m, 2m+1) + l(2m+1, 2m)) / 2` per item.
    pub pair_losses: Vec<f64>,
}

pub fn nt_xent_report(batch: &EmbeddingBatch, tau: Temperature) -> NtXentReport {
    let unit = batch.normalized();
    let pair_losses: Vec<f64> = (0..batch.pairs())
        .map(|m| {
            let (a, b) = (2 * m, 2 * m + 1);
            (pair_loss_unit(&unit, a, b, tau.get()) + pair_loss_unit(&unit, b, a, tau.get())) / 2.0
        })
        .collect();
    NtXentReport {
        tau: tau.get(),
        pairs: batch.pairs(),
        dim: batch.dim,
        batch_loss: pair_losses.iter().sum::<f64>() / pair_losses.len() as f64,
        pair_losses,
    }
}

/// Mean over both orderings of every positive pair.
pub fn nt_xent_batch_loss(batch: &EmbeddingBatch, tau: Temperature) -> f64 {
    nt_xent_report(batch, tau).batch_loss
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[3.0, -4.0], &[3.0, -4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroNorm { .. })
        ));
    }

    #[test]
    fn single_pair_loss_is_zero() {
        let b = EmbeddingBatch::new(vec![vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
        assert_eq!(nt_xent_pair_loss(&b, 0, 1, Temperature::default()).unwrap(), 0.0);
        assert_eq!(nt_xent_batch_loss(&b, Temperature::default()), 0.0);
    }

    #[test]
    fn two_orthogonal_pairs_tau_1() {
        let b = EmbeddingBatch::new(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let e = std::f64::consts::E;
        let expected = -(e / (e + 2.0)).ln();
        let tau = Temperature::new(1.0).unwrap();
        let got = nt_xent_pair_loss(&b, 0, 1, tau).unwrap();
        assert!((got - expected).abs() < 1e-14);
        // Every ordered pair sees the same picture, so the batch mean agrees.
        assert!((nt_xent_batch_loss(&b, tau) - expected).abs() < 1e-14);
    }

    #[test]
    fn loss_is_scale_invariant() {
        let rows = vec![
            vec![0.3, -1.2, 0.8],
            vec![0.1, -1.0, 0.9],
            vec![2.0, 0.4, -0.3],
            vec![1.7, 0.2, 0.1],
        ];
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * 3.0).collect()).collect();
        let a = nt_xent_batch_loss(&EmbeddingBatch::new(rows).unwrap(), Temperature::default());
        let b = nt_xent_batch_loss(&EmbeddingBatch::new(scaled).unwrap(), Temperature::default());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let b = EmbeddingBatch::new(vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            nt_xent_pair_loss(&b, 0, 2, Temperature::default()),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        assert!(nt_xent_pair_loss(&b, 1, 1, Temperature::default()).is_err());
        assert!(EmbeddingBatch::new(vec![vec![1.0]]).is_err());
        assert!(matches!(
            EmbeddingBatch::new(vec![vec![1.0], vec![0.0]]),
            Err(Error::ZeroNorm { row: 1 })
        ));
        assert!(Temperature::new(0.0).is_err());
        assert!(Temperature::new(-1.0).is_err());
    }

    #[test]
    fn small_tau_does_not_overflow() {
        let b = EmbeddingBatch::new(vec![
            vec![1.0, 0.0],
            vec![0.9, 0.1],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let l = nt_xent_batch_loss(&b, Temperature::new(1e-3).unwrap());
        assert!(l.is_finite() && l >= 0.0);
    }
}
