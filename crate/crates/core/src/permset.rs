//! Jigsaw pretext task: maximally separated 3x3 permutation sets and
//! labeled tile samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_grid_permutation, join_cells, split_cells, GridPermutation};
use crate::image::ImageBuffer;
use crate::rng::RandomSource;

pub const TILES: usize = 9;
/// 9!
pub const ALL_PERMUTATIONS: usize = 362_880;
pub const DEFAULT_CANDIDATE_POOL: usize = 10_000;

pub type Permutation = [u8; TILES];

#[inline]
pub fn hamming(a: &Permutation, b: &Permutation) -> u8 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u8
}

/// Every permutation of `0..9` in lexicographic order.
pub fn all_permutations() -> Vec<Permutation> {
    let mut out = Vec::with_capacity(ALL_PERMUTATIONS);
    let mut p: Permutation = [0, 1, 2, 3, 4, 5, 6, 7, 8];
    loop {
        out.push(p);
        // Next lexicographic permutation.
        let Some(i) = (0..TILES - 1).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..TILES).rev().find(|&j| p[j] > p[i]).expect("pivot exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

fn random_permutation<R: RandomSource + ?Sized>(rng: &mut R) -> Permutation {
    let mut p: Permutation = [0, 1, 2, 3, 4, 5, 6, 7, 8];
    rng.shuffle(&mut p);
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSet {
    pub perms: Vec<Permutation>,
    pub pairwise_hamming: Vec<Vec<u8>>,
    pub mean_hamming: f64,
    pub min_hamming: u8,
}

impl PermutationSet {
    /// Builds the set and its statistics. Fails on duplicates, on entries
    /// that are not permutations of `0..9`, or on fewer than two entries.
    pub fn from_perms(perms: Vec<Permutation>) -> Result<Self> {
        if perms.len() < 2 {
            return Err(Error::InvalidParam(
                "a permutation set needs at least 2 entries".into(),
            ));
        }
        for p in &perms {
            let mut seen = [false; TILES];
            for &v in p {
                if v as usize >= TILES || std::mem::replace(&mut seen[v as usize], true) {
                    return Err(Error::InvalidParam(format!("{p:?} is not a permutation of 0..9")));
                }
            }
        }
        let n = perms.len();
        let mut matrix = vec![vec![0u8; n]; n];
        let mut sum = 0u64;
        let mut min = u8::MAX;
        for i in 0..n {
            for j in i + 1..n {
                let d = hamming(&perms[i], &perms[j]);
                if d == 0 {
                    return Err(Error::InvalidParam(format!(
                        "duplicate permutation at {i} and {j}"
                    )));
                }
                matrix[i][j] = d;
                matrix[j][i] = d;
                sum += u64::from(d);
                min = min.min(d);
            }
        }
        let pairs = (n * (n - 1) / 2) as f64;
        Ok(Self {
            perms,
            pairwise_hamming: matrix,
            mean_hamming: sum as f64 / pairs,
            min_hamming: min,
        })
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// The first `count` permutations, with statistics recomputed.
    pub fn prefix(&self, count: usize) -> Result<Self> {
        Self::from_perms(self.perms[..count.min(self.len())].to_vec())
    }

    pub fn grid_permutation(&self, label: usize) -> Result<GridPermutation> {
        let p = self.perms.get(label).ok_or(Error::IndexOutOfRange {
            index: label,
            len: self.len(),
        })?;
        GridPermutation::new(3, p.iter().map(|&v| v as usize).collect())
    }
}

/// Where greedy candidates come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidatePool {
    /// All 9! permutations at every step.
    Exhaustive,
    /// This many fresh random permutations per step.
    Random(usize),
}

impl CandidatePool {
    /// `0` selects exhaustive mode.
    pub fn from_size(size: usize) -> Self {
        if size == 0 {
            CandidatePool::Exhaustive
        } else {
            CandidatePool::Random(size)
        }
    }
}

/// Greedy max-min construction.
///
/// Starts from one uniformly random permutation; each step adds the
/// candidate whose minimum Hamming distance to the chosen set is largest,
/// breaking ties by the larger total distance and then by candidate order.
pub fn generate_permutation_set<R: RandomSource + ?Sized>(
    count: usize,
    pool: CandidatePool,
    rng: &mut R,
) -> Result<PermutationSet> {
    if count < 2 {
        return Err(Error::InvalidParam(
            "permutation set size must be at least 2".into(),
        ));
    }
    if count > ALL_PERMUTATIONS {
        return Err(Error::InvalidParam(format!(
            "cannot choose {count} distinct permutations of 9 tiles (9! = {ALL_PERMUTATIONS})"
        )));
    }
    let first = random_permutation(rng);
    let chosen = match pool {
        CandidatePool::Exhaustive => greedy_exhaustive(first, count),
        CandidatePool::Random(size) => {
            if size == 0 {
                return Err(Error::InvalidParam("candidate pool must be positive".into()));
            }
            greedy_sampled(first, count, size, rng)
        }
    };
    PermutationSet::from_perms(chosen)
}

fn greedy_exhaustive(first: Permutation, count: usize) -> Vec<Permutation> {
    let all = all_permutations();
    // Running min and sum of distances from each candidate to the chosen set.
    let mut min_d = vec![u8::MAX; all.len()];
    let mut sum_d = vec![0u32; all.len()];
    let mut chosen = Vec::with_capacity(count);
    let mut next = first;
    loop {
        chosen.push(next);
        if chosen.len() == count {
            return chosen;
        }
        let mut best: Option<(u8, u32, usize)> = None;
        for (idx, cand) in all.iter().enumerate() {
            let d = hamming(cand, &next);
            let m = min_d[idx].min(d);
            min_d[idx] = m;
            sum_d[idx] += u32::from(d);
            if m == 0 {
                continue;
            }
            let key = (m, sum_d[idx]);
            if best.is_none_or(|(bm, bs, _)| key > (bm, bs)) {
                best = Some((m, sum_d[idx], idx));
            }
        }
        let (_, _, idx) = best.expect("count <= 9! leaves a candidate");
        next = all[idx];
    }
}

fn greedy_sampled<R: RandomSource + ?Sized>(
    first: Permutation,
    count: usize,
    pool: usize,
    rng: &mut R,
) -> Vec<Permutation> {
    let mut chosen = vec![first];
    let mut candidates = Vec::with_capacity(pool);
    while chosen.len() < count {
        candidates.clear();
        candidates.extend((0..pool).map(|_| random_permutation(rng)));
        let mut best: Option<(u8, u32, Permutation)> = None;
        for cand in &candidates {
            let mut m = u8::MAX;
            let mut s = 0u32;
            for c in &chosen {
                let d = hamming(cand, c);
                m = m.min(d);
                s += u32::from(d);
                if m == 0 {
                    break;
                }
            }
            if m == 0 {
                continue;
            }
            if best.is_none_or(|(bm, bs, _)| (m, s) > (bm, bs)) {
                best = Some((m, s, *cand));
            }
        }
        // A pool made only of already-chosen permutations is redrawn.
        if let Some((_, _, p)) = best {
            chosen.push(p);
        }
    }
    chosen
}

/// Nine tiles in shuffled order plus the index of the permutation used.
#[derive(Debug, Clone, PartialEq)]
pub struct JigsawSample {
    pub tiles: Vec<ImageBuffer>,
    pub label: usize,
}

impl JigsawSample {
    /// Puts tile `p` back at cell `perms[label][p]`.
    pub fn reassemble(&self, set: &PermutationSet) -> Result<ImageBuffer> {
        let perm = set.grid_permutation(self.label)?;
        let shuffled = join_cells(&self.tiles, 3)?;
        apply_grid_permutation(&shuffled, &perm.inverse())
    }
}

/// Draws a label uniformly and emits the 3x3 tiles in that order: tile `p`
/// is source cell `perms[label][p]`.
pub fn make_jigsaw_sample<R: RandomSource + ?Sized>(
    img: &ImageBuffer,
    set: &PermutationSet,
    rng: &mut R,
) -> Result<JigsawSample> {
    if set.is_empty() {
        return Err(Error::EmptyInput("permutation set is empty".into()));
    }
    let cells = split_cells(img, 3)?;
    let label = rng.below(set.len() as u64) as usize;
    let tiles = set.perms[label]
        .iter()
        .map(|&src| cells[src as usize].clone())
        .collect();
    Ok(JigsawSample { tiles, label })
}
