//! Independent reference computations for tests. Nothing here calls into
//! the code paths it is used to check.
#![allow(dead_code)]

/// NT-Xent by materializing the full `2N x 2N` cosine matrix and evaluating
/// the loss termwise with plain `exp` / `ln`.
pub fn nt_xent_matrix(rows: &[Vec<f64>], tau: f64) -> f64 {
    let n2 = rows.len();
    let norms: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut sim = vec![vec![0.0; n2]; n2];
    for i in 0..n2 {
        for j in 0..n2 {
            let d: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            sim[i][j] = d / (norms[i] * norms[j]);
        }
    }
    let term = |i: usize, j: usize| {
        let num = (sim[i][j] / tau).exp();
        let den: f64 = (0..n2)
            .filter(|&k| k != i)
            .map(|k| (sim[i][k] / tau).exp())
            .sum();
        -(num / den).ln()
    };
    let mut total = 0.0;
    for m in 0..n2 / 2 {
        total += term(2 * m, 2 * m + 1) + term(2 * m + 1, 2 * m);
    }
    total / n2 as f64
}

/// Pixel-space content loss as a double loop over `(x, y)` of the
/// high-resolution grid, summing channels and dividing by `r^2 W H C`.
pub fn mse_double_loop(
    hr: &[f64],
    sr: &[f64],
    r: usize,
    lr_w: usize,
    lr_h: usize,
    channels: usize,
) -> f64 {
    let (w, h) = (r * lr_w, r * lr_h);
    let mut acc = 0.0;
    for x in 0..w {
        for y in 0..h {
            for c in 0..channels {
                let i = (y * w + x) * channels + c;
                acc += (hr[i] - sr[i]).powi(2);
            }
        }
    }
    acc / ((r * r * lr_w * lr_h * channels) as f64)
}

/// Feature-space content loss as a double loop, channels summed, divided by `W H`.
pub fn feature_double_loop(a: &[f64], b: &[f64], w: usize, h: usize, channels: usize) -> f64 {
    let mut acc = 0.0;
    for x in 0..w {
        for y in 0..h {
            for c in 0..channels {
                let i = (y * w + x) * channels + c;
                acc += (a[i] - b[i]).powi(2);
            }
        }
    }
    acc / ((w * h) as f64)
}

/// Brute force over every permutation of `0..9` (Heap's algorithm): the
/// largest Hamming distance any permutation reaches from `from`.
pub fn max_hamming_from(from: &[u8; 9]) -> usize {
    let mut a: [u8; 9] = [0, 1, 2, 3, 4, 5, 6, 7, 8];
    let mut c = [0usize; 9];
    let dist = |p: &[u8; 9]| p.iter().zip(from).filter(|(x, y)| x != y).count();
    let mut best = dist(&a);
    let mut visited = 1usize;
    let mut i = 0;
    while i < 9 {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            best = best.max(dist(&a));
            visited += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    assert_eq!(visited, 362_880);
    best
}

/// `true` when `mapping` hits every index in `0..len` exactly once.
pub fn is_bijection(mapping: &[usize], len: usize) -> bool {
    let got: std::collections::BTreeSet<usize> = mapping.iter().copied().collect();
    mapping.len() == len && got == (0..len).collect()
}

/// Smartcrop score evaluated pixel by pixel from the weight definition
/// `max(0, 1 - max(|u|, |v|)^2)` over crop-relative pixel centers.
pub fn crop_score_direct(
    edge: &[f64],
    sat: &[f64],
    width: usize,
    x0: usize,
    y0: usize,
    side: usize,
    sat_weight: f64,
) -> f64 {
    let mut acc = 0.0;
    for y in y0..y0 + side {
        for x in x0..x0 + side {
            let u = ((x - x0) as f64 + 0.5) / side as f64 * 2.0 - 1.0;
            let v = ((y - y0) as f64 + 0.5) / side as f64 * 2.0 - 1.0;
            let w = (1.0 - u.abs().max(v.abs()).powi(2)).max(0.0);
            acc += (edge[y * width + x] + sat_weight * sat[y * width + x]) * w;
        }
    }
    acc / (side * side) as f64
}

/// Deterministic xorshift for fixtures, independent of the crate's RNG.
pub struct FixtureRng(pub u64);

impl FixtureRng {
    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next() % (hi_inclusive - lo + 1) as u64) as usize
    }

    pub fn normal_ish(&mut self) -> f64 {
        // Sum of uniforms; plenty for generating test embeddings.
        (0..4).map(|_| self.unit()).sum::<f64>() - 2.0
    }
}
