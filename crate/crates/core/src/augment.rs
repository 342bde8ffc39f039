//! Fine-grained augmentations: gamma, coarse dropout, patch swapping,
//! random jigsaw and neighborhood-constrained (DCL) jigsaw.
//!
//! Every operation is a pure function of `(image, params, rng state)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_grid_permutation, partition, GridPermutation};
use crate::image::ImageBuffer;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaParams {
    pub level_min: u32,
    pub level_max: u32,
}

impl Default for GammaParams {
    fn default() -> Self {
        Self {
            level_min: 50,
            level_max: 250,
        }
    }
}

impl GammaParams {
    pub fn validate(&self) -> Result<()> {
        let range = 1..=1000;
        if !range.contains(&self.level_min) || !range.contains(&self.level_max) {
            return Err(Error::InvalidParam(format!(
                "gamma levels must lie in [1, 1000], got {}..{}",
                self.level_min, self.level_max
            )));
        }
        if self.level_min > self.level_max {
            return Err(Error::InvalidParam(format!(
                "gamma level_min {} exceeds level_max {}",
                self.level_min, self.level_max
            )));
        }
        Ok(())
    }
}

/// Draws a level `L` in `[level_min, level_max]` and maps every sample
/// `p` to `p^(L/100)`.
pub fn gamma_transform<R: RandomSource + ?Sized>(
    img: &ImageBuffer,
    params: &GammaParams,
    rng: &mut R,
) -> Result<ImageBuffer> {
    params.validate()?;
    let level = rng.int_inclusive(params.level_min.into(), params.level_max.into());
    Ok(apply_gamma(img, level as f64 / 100.0))
}

pub fn apply_gamma(img: &ImageBuffer, gamma: f64) -> ImageBuffer {
    if gamma == 1.0 {
        return img.clone();
    }
    img.map(|p| f64::from(p).powf(gamma) as f32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DropoutParams {
    pub hole_count: usize,
    pub side_min: usize,
    pub side_max: usize,
}

impl Default for DropoutParams {
    fn default() -> Self {
        Self {
            hole_count: 8,
            side_min: 10,
            side_max: 25,
        }
    }
}

impl DropoutParams {
    pub fn validate(&self) -> Result<()> {
        if self.hole_count == 0 {
            return Err(Error::InvalidParam("hole_count must be at least 1".into()));
        }
        if self.side_min == 0 || self.side_min > self.side_max {
            return Err(Error::InvalidParam(format!(
                "need 0 < side_min <= side_max, got {}..{}",
                self.side_min, self.side_max
            )));
        }
        Ok(())
    }
}

/// Axis-aligned square, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Square {
    pub x: usize,
    pub y: usize,
    pub side: usize,
}

impl Square {
    pub fn contains(&self, px: usize, py: usize) -> bool {
        (self.x..self.x + self.side).contains(&px) && (self.y..self.y + self.side).contains(&py)
    }

    pub fn overlaps(&self, other: &Square) -> bool {
        self.x < other.x + other.side
            && other.x < self.x + self.side
            && self.y < other.y + other.side
            && other.y < self.y + self.side
    }
}

/// Hole placement used by [`coarse_dropout`]. Per hole the draws are: side,
/// then x, then y.
pub fn sample_dropout_holes<R: RandomSource + ?Sized>(
    width: usize,
    height: usize,
    params: &DropoutParams,
    rng: &mut R,
) -> Result<Vec<Square>> {
    params.validate()?;
    if params.side_max > width.min(height) {
        return Err(Error::TooSmall(format!(
            "dropout side {} exceeds {width}x{height} image",
            params.side_max
        )));
    }
    Ok((0..params.hole_count)
        .map(|_| {
            let side = rng.int_inclusive(params.side_min as i64, params.side_max as i64) as usize;
            let x = rng.below((width - side + 1) as u64) as usize;
            let y = rng.below((height - side + 1) as u64) as usize;
            Square { x, y, side }
        })
        .collect())
}

pub fn fill_squares(img: &ImageBuffer, squares: &[Square], value: f32) -> ImageBuffer {
    let mut out = img.clone();
    for sq in squares {
        for y in sq.y..(sq.y + sq.side).min(img.height()) {
            for x in sq.x..(sq.x + sq.side).min(img.width()) {
                for c in 0..img.channels() {
                    out.set(x, y, c, value);
                }
            }
        }
    }
    out
}

/// Zeroes `hole_count` random squares.
pub fn coarse_dropout<R: RandomSource + ?Sized>(
    img: &ImageBuffer,
    params: &DropoutParams,
    rng: &mut R,
) -> Result<ImageBuffer> {
    let holes = sample_dropout_holes(img.width(), img.height(), params, rng)?;
    Ok(fill_squares(img, &holes, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchSwapParams {
    pub patch_side: usize,
}

impl Default for PatchSwapParams {
    fn default() -> Self {
        Self { patch_side: 200 }
    }
}

/// Top-left offsets in `[0, limit]` that lie at least `side` away from `from`.
fn far_offsets(limit: usize, from: usize, side: usize) -> Vec<usize> {
    (0..=limit).filter(|&v| v.abs_diff(from) >= side).collect()
}

/// Offsets in `[0, limit]` admitting at least one partner `side` away.
fn admitting_offsets(limit: usize, side: usize) -> Vec<usize> {
    (0..=limit)
        .filter(|&v| v >= side || v + side <= limit)
        .collect()
}

/// Uniform draw from `(xs_ok x all_y) ∪ (all_x x ys_ok)`.
fn draw_from_cross<R: RandomSource + ?Sized>(
    xs_ok: &[usize],
    ys_ok: &[usize],
    nx: usize,
    ny: usize,
    rng: &mut R,
) -> Option<(usize, usize)> {
    // Split into xs_ok x all_y and (all_x \ xs_ok) x ys_ok, which are disjoint.
    let part1 = xs_ok.len() * ny;
    let rest_x: Vec<usize> = (0..nx).filter(|x| xs_ok.binary_search(x).is_err()).collect();
    let part2 = rest_x.len() * ys_ok.len();
    let total = part1 + part2;
    if total == 0 {
        return None;
    }
    let t = rng.below(total as u64) as usize;
    Some(if t < part1 {
        (xs_ok[t / ny], t % ny)
    } else {
        let t = t - part1;
        (rest_x[t / ys_ok.len()], ys_ok[t % ys_ok.len()])
    })
}

/// Picks two disjoint `side`x`side` squares.
///
/// The first square is uniform over placements that admit a disjoint partner;
/// the second is uniform over placements disjoint from the first.
pub fn sample_swap_patches<R: RandomSource + ?Sized>(
    width: usize,
    height: usize,
    params: &PatchSwapParams,
    rng: &mut R,
) -> Result<(Square, Square)> {
    let side = params.patch_side;
    if side == 0 {
        return Err(Error::InvalidParam("patch_side must be at least 1".into()));
    }
    let too_small = || {
        Error::TooSmall(format!(
            "{width}x{height} image cannot hold two disjoint {side}x{side} patches"
        ))
    };
    if side > width || side > height {
        return Err(too_small());
    }
    let (lx, ly) = (width - side, height - side);
    let (nx, ny) = (lx + 1, ly + 1);
    let (x1, y1) = draw_from_cross(
        &admitting_offsets(lx, side),
        &admitting_offsets(ly, side),
        nx,
        ny,
        rng,
    )
    .ok_or_else(too_small)?;
    let (x2, y2) = draw_from_cross(
        &far_offsets(lx, x1, side),
        &far_offsets(ly, y1, side),
        nx,
        ny,
        rng,
    )
    .ok_or_else(too_small)?;
    Ok((
        Square { x: x1, y: y1, side },
        Square { x: x2, y: y2, side },
    ))
}

pub fn swap_squares(img: &ImageBuffer, a: Square, b: Square) -> Result<ImageBuffer> {
    if a.side != b.side || a.overlaps(&b) {
        return Err(Error::InvalidParam(
            "swapped squares must be equal-sized and disjoint".into(),
        ));
    }
    let pa = img.crop(a.x, a.y, a.side, a.side)?;
    let pb = img.crop(b.x, b.y, b.side, b.side)?;
    let mut out = img.clone();
    out.paste(&pb, a.x, a.y)?;
    out.paste(&pa, b.x, b.y)?;
    Ok(out)
}

/// Exchanges the contents of two random disjoint squares.
pub fn patch_swap<R: RandomSource + ?Sized>(
    img: &ImageBuffer,
    params: &PatchSwapParams,
    rng: &mut R,
) -> Result<ImageBuffer> {
    let (a, b) = sample_swap_patches(img.width(), img.height(), params, rng)?;
    swap_squares(img, a, b)
}

/// Shuffles the `n x n` grid by a Fisher-Yates permutation.
pub fn random_jigsaw<R: RandomSource + ?Sized>(
    img: &ImageBuffer,
    n: usize,
    rng: &mut R,
) -> Result<(ImageBuffer, GridPermutation)> {
    partition(img, n)?;
    let mut mapping: Vec<usize> = (0..n * n).collect();
    rng.shuffle(&mut mapping);
    let perm = GridPermutation::new(n, mapping)?;
    Ok((apply_grid_permutation(img, &perm)?, perm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DclParams {
    pub n: usize,
    pub k: usize,
}

impl Default for DclParams {
    fn default() -> Self {
        Self { n: 7, k: 2 }
    }
}

impl DclParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return Err(Error::InvalidParam(format!(
                "DCL needs n >= 1 and 1 <= k <= n, got n={} k={}",
                self.n, self.k
            )));
        }
        Ok(())
    }
}

/// The permutations behind one DCL shuffle.
///
/// `rows[j][p]` is the column (before shuffling) of the cell that lands at
/// column `p` of row `j`; `cols[i][p]` likewise for rows within column `i`,
/// applied after the row pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DclShuffle {
    pub rows: Vec<Vec<usize>>,
    pub cols: Vec<Vec<usize>>,
    pub composite: GridPermutation,
}

impl DclShuffle {
    /// Largest `|σ(i) - i|` over all row and column permutations.
    pub fn max_displacement(&self) -> usize {
        self.rows
            .iter()
            .chain(&self.cols)
            .flat_map(|p| p.iter().enumerate().map(|(i, &s)| i.abs_diff(s)))
            .max()
            .unwrap_or(0)
    }
}

/// Keys `i + r`, `r ~ U[-k, k)`, stable-sorted.
fn local_permutation<R: RandomSource + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let k = k as f64;
    let keys: Vec<f64> = (0..n)
        .map(|i| i as f64 + rng.uniform_range(-k, k))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    order
}

/// Draws the row pass (rows top to bottom) and then the column pass
/// (columns left to right).
pub fn dcl_permutation<R: RandomSource + ?Sized>(
    params: &DclParams,
    rng: &mut R,
) -> Result<DclShuffle> {
    params.validate()?;
    let n = params.n;
    let rows: Vec<Vec<usize>> = (0..n).map(|_| local_permutation(n, params.k, rng)).collect();
    let cols: Vec<Vec<usize>> = (0..n).map(|_| local_permutation(n, params.k, rng)).collect();

    let mut after_rows = vec![0; n * n];
    for (j, row) in rows.iter().enumerate() {
        for (p, &src) in row.iter().enumerate() {
            after_rows[j * n + p] = j * n + src;
        }
    }
    let mut composite = vec![0; n * n];
    for (i, col) in cols.iter().enumerate() {
        for (p, &src) in col.iter().enumerate() {
            composite[p * n + i] = after_rows[src * n + i];
        }
    }
    Ok(DclShuffle {
        rows,
        cols,
        composite: GridPermutation::new(n, composite)?,
    })
}

/// Region-confusion shuffle: cells move only within a `2k` neighborhood of
/// their row and then of their column.
pub fn dcl_jigsaw<R: RandomSource + ?Sized>(
    img: &ImageBuffer,
    params: &DclParams,
    rng: &mut R,
) -> Result<(ImageBuffer, GridPermutation)> {
    params.validate()?;
    partition(img, params.n)?;
    let shuffle = dcl_permutation(params, rng)?;
    Ok((
        apply_grid_permutation(img, &shuffle.composite)?,
        shuffle.composite,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn sorted(img: &ImageBuffer) -> Vec<f32> {
        let mut v = img.data().to_vec();
        v.sort_by(f32::total_cmp);
        v
    }

    fn gradient(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 3, |x, y, c| {
            ((x * 31 + y * 17 + c * 7) % 256) as f32 / 255.0
        })
        .unwrap()
    }

    /// Always returns the midpoint of its range.
    struct Midpoint;

    impl RandomSource for Midpoint {
        fn next_u64(&mut self) -> u64 {
            1 << 63
        }
    }

    #[test]
    fn gamma_level_100_is_identity() {
        let img = gradient(8, 8);
        let p = GammaParams {
            level_min: 100,
            level_max: 100,
        };
        assert_eq!(gamma_transform(&img, &p, &mut Rng::new(1)).unwrap(), img);
    }

    #[test]
    fn gamma_fixed_points_and_square() {
        let img = ImageBuffer::new(3, 1, 1, vec![1.0, 0.25, 0.0]).unwrap();
        let p = GammaParams {
            level_min: 200,
            level_max: 200,
        };
        let out = gamma_transform(&img, &p, &mut Rng::new(9)).unwrap();
        assert_eq!(out.data(), &[1.0, 0.0625, 0.0]);
        for seed in 0..20 {
            let any = gamma_transform(&img, &GammaParams::default(), &mut Rng::new(seed)).unwrap();
            assert_eq!(any.get(0, 0, 0), 1.0);
        }
    }

    #[test]
    fn gamma_params_validated() {
        let bad = GammaParams {
            level_min: 300,
            level_max: 200,
        };
        assert!(gamma_transform(&gradient(2, 2), &bad, &mut Rng::new(0)).is_err());
        let zero = GammaParams {
            level_min: 0,
            level_max: 10,
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn single_hole_zeroes_exactly_100_pixels() {
        let white = ImageBuffer::filled(64, 48, 3, 1.0).unwrap();
        let p = DropoutParams {
            hole_count: 1,
            side_min: 10,
            side_max: 10,
        };
        for seed in 0..10 {
            let out = coarse_dropout(&white, &p, &mut Rng::new(seed)).unwrap();
            let zeroed = (0..48)
                .flat_map(|y| (0..64).map(move |x| (x, y)))
                .filter(|&(x, y)| out.pixel(x, y).iter().all(|&v| v == 0.0))
                .count();
            assert_eq!(zeroed, 100);
        }
    }

    #[test]
    fn dropout_side_larger_than_image_fails() {
        let img = ImageBuffer::filled(20, 40, 1, 1.0).unwrap();
        let err = coarse_dropout(&img, &DropoutParams::default(), &mut Rng::new(0)).unwrap_err();
        assert!(matches!(err, Error::TooSmall(_)));
    }

    #[test]
    fn dropout_is_deterministic() {
        let img = gradient(100, 80);
        let a = coarse_dropout(&img, &DropoutParams::default(), &mut Rng::new(77)).unwrap();
        let b = coarse_dropout(&img, &DropoutParams::default(), &mut Rng::new(77)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, img);
    }

    #[test]
    fn patch_swap_on_uniform_image_is_identity() {
        let img = ImageBuffer::filled(50, 30, 3, 0.4).unwrap();
        let p = PatchSwapParams { patch_side: 10 };
        assert_eq!(patch_swap(&img, &p, &mut Rng::new(5)).unwrap(), img);
    }

    #[test]
    fn patch_swap_twice_with_same_seed_restores() {
        let img = gradient(60, 40);
        let p = PatchSwapParams { patch_side: 15 };
        let once = patch_swap(&img, &p, &mut Rng::new(8)).unwrap();
        assert_ne!(once, img);
        assert_eq!(patch_swap(&once, &p, &mut Rng::new(8)).unwrap(), img);
    }

    #[test]
    fn only_placement_in_400x200_swaps_halves() {
        // Oracle: enumerate every pair of top-left corners by brute force.
        let side = 200;
        let mut feasible = Vec::new();
        for x1 in 0..=200 {
            for x2 in 0..=200 {
                let a = Square { x: x1, y: 0, side };
                let b = Square { x: x2, y: 0, side };
                if !a.overlaps(&b) {
                    feasible.push((x1, x2));
                }
            }
        }
        assert_eq!(feasible, vec![(0, 200), (200, 0)]);

        let img = ImageBuffer::from_fn(400, 200, 1, |x, _, _| if x < 200 { 0.2 } else { 0.8 }).unwrap();
        for seed in 0..20 {
            let (a, b) = sample_swap_patches(400, 200, &PatchSwapParams::default(), &mut Rng::new(seed)).unwrap();
            assert!(feasible.contains(&(a.x, b.x)));
            let out = patch_swap(&img, &PatchSwapParams::default(), &mut Rng::new(seed)).unwrap();
            assert_eq!(out.get(0, 0, 0), 0.8);
            assert_eq!(out.get(399, 199, 0), 0.2);
        }
    }

    #[test]
    fn patch_swap_too_small() {
        let img = ImageBuffer::filled(399, 200, 1, 0.0).unwrap();
        assert!(matches!(
            patch_swap(&img, &PatchSwapParams::default(), &mut Rng::new(0)),
            Err(Error::TooSmall(_))
        ));
    }

    #[test]
    fn swap_placements_are_uniform_over_disjoint_pairs() {
        // 3x1 positions with side 1 on a 3x1 image: 6 ordered disjoint pairs.
        let mut counts = std::collections::BTreeMap::new();
        let mut rng = Rng::new(4);
        for _ in 0..6000 {
            let (a, b) = sample_swap_patches(3, 1, &PatchSwapParams { patch_side: 1 }, &mut rng).unwrap();
            assert!(!a.overlaps(&b));
            *counts.entry((a.x, b.x)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&c| (850..1150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn random_jigsaw_n1_is_identity() {
        let img = gradient(10, 10);
        let (out, perm) = random_jigsaw(&img, 1, &mut Rng::new(3)).unwrap();
        assert!(perm.is_identity());
        assert_eq!(out, img);
    }

    #[test]
    fn random_jigsaw_4x4_on_224() {
        let img = gradient(224, 224);
        let (out, perm) = random_jigsaw(&img, 4, &mut Rng::new(21)).unwrap();
        assert_eq!(perm.mapping().len(), 16);
        assert_eq!(sorted(&out), sorted(&img));
        let (_, again) = random_jigsaw(&img, 4, &mut Rng::new(21)).unwrap();
        assert_eq!(perm, again);
        assert!(random_jigsaw(&gradient(10, 9), 3, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn dcl_with_zero_offsets_is_identity() {
        let shuffle = dcl_permutation(&DclParams::default(), &mut Midpoint).unwrap();
        assert!(shuffle.composite.is_identity());
        assert_eq!(shuffle.max_displacement(), 0);
    }

    #[test]
    fn dcl_n7_k2_displacement_bound() {
        let p = DclParams::default();
        for seed in 0..200 {
            let s = dcl_permutation(&p, &mut Rng::new(seed)).unwrap();
            assert!(s.max_displacement() < 4);
        }
    }

    #[test]
    fn dcl_rejects_bad_k() {
        let img = gradient(21, 21);
        for k in [0, 4] {
            let p = DclParams { n: 3, k };
            assert!(dcl_jigsaw(&img, &p, &mut Rng::new(0)).is_err());
        }
    }

    #[test]
    fn dcl_composite_matches_two_passes() {
        // Apply the row pass and the column pass as separate grid permutations.
        let p = DclParams { n: 5, k: 2 };
        let img = gradient(25, 25);
        let s = dcl_permutation(&p, &mut Rng::new(12)).unwrap();
        let n = p.n;
        let mut rows = vec![0; n * n];
        let mut cols = vec![0; n * n];
        for j in 0..n {
            for q in 0..n {
                rows[j * n + q] = j * n + s.rows[j][q];
                cols[q * n + j] = s.cols[j][q] * n + j;
            }
        }
        let rows = GridPermutation::new(n, rows).unwrap();
        let cols = GridPermutation::new(n, cols).unwrap();
        let two_pass = apply_grid_permutation(&apply_grid_permutation(&img, &rows).unwrap(), &cols).unwrap();
        let (once, _) = dcl_jigsaw(&img, &p, &mut Rng::new(12)).unwrap();
        assert_eq!(once, two_pass);
    }
}
