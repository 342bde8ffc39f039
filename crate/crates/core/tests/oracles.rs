#[path = "support/oracles.rs"]
mod oracles;

use finegrain_core::augment::{dcl_permutation, DclParams};
use finegrain_core::contrastive::{nt_xent_batch_loss, nt_xent_pair_loss, EmbeddingBatch, Temperature};
use finegrain_core::permset::{generate_permutation_set, CandidatePool};
use finegrain_core::smartcrop::{score_crop, CropCandidate, SaliencyMaps, SmartcropConfig};
use finegrain_core::sr::{
    bicubic_downscale, feature_content_loss, mse_content_loss, pixel_shuffle, ChannelNorm, Tensor3,
    UpscaleFactor,
};
use finegrain_core::{ImageBuffer, Rng};
use oracles::FixtureRng;

fn random_rows(rng: &mut FixtureRng, rows: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..dim).map(|_| rng.normal_ish()).collect())
        .collect()
}

fn random_tensor(rng: &mut FixtureRng, w: usize, h: usize, c: usize) -> Tensor3 {
    let data = (0..w * h * c).map(|_| rng.unit() * 2.0 - 1.0).collect();
    Tensor3::new(w, h, c, data).unwrap()
}

#[test]
fn nt_xent_matches_full_matrix() {
    let mut fx = FixtureRng(0x1234_5678);
    for trial in 0..60 {
        let pairs = fx.range(1, 16);
        let dim = fx.range(1, 32);
        let tau = [0.1, 0.5, 1.0][trial % 3];
        let rows = random_rows(&mut fx, 2 * pairs, dim);
        let batch = EmbeddingBatch::new(rows.clone()).unwrap();
        let got = nt_xent_batch_loss(&batch, Temperature::new(tau).unwrap());
        let want = oracles::nt_xent_matrix(&rows, tau);
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1.0),
            "trial {trial}: {got} vs {want}"
        );
    }
}

#[test]
fn nt_xent_two_orthogonal_pairs() {
    // Positives coincide, negatives are orthogonal: each term is
    // -ln(e^2 / (e^2 + 2)).
    let rows = vec![
        vec![1.0, 0.0],
        vec![2.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 3.0],
    ];
    let batch = EmbeddingBatch::new(rows).unwrap();
    let tau = Temperature::new(0.5).unwrap();
    let e2 = 2f64.exp();
    let want = -(e2 / (e2 + 2.0)).ln();
    assert!((nt_xent_batch_loss(&batch, tau) - want).abs() < 1e-12);
    assert!((nt_xent_pair_loss(&batch, 3, 2, tau).unwrap() - want).abs() < 1e-12);
}

#[test]
fn content_losses_match_double_loops() {
    let mut fx = FixtureRng(99);
    for _ in 0..50 {
        let r = fx.range(1, 4);
        let (lw, lh) = (fx.range(1, 4), fx.range(1, 4));
        let c = fx.range(1, 8);
        let hr = random_tensor(&mut fx, r * lw, r * lh, c);
        let sr = random_tensor(&mut fx, r * lw, r * lh, c);
        let got = mse_content_loss(&hr, &sr, UpscaleFactor::new(r).unwrap(), lw, lh, ChannelNorm::Mean).unwrap();
        let want = oracles::mse_double_loop(hr.data(), sr.data(), r, lw, lh, c);
        assert!((got - want).abs() < 1e-12);

        let (w, h) = (fx.range(1, 16), fx.range(1, 16));
        let a = random_tensor(&mut fx, w, h, c);
        let b = random_tensor(&mut fx, w, h, c);
        let got = feature_content_loss(&a, &b, ChannelNorm::Sum).unwrap();
        let want = oracles::feature_double_loop(a.data(), b.data(), w, h, c);
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn pixel_shuffle_index_formula() {
    let (w, h, c, r) = (3, 2, 2, 2);
    let data: Vec<f64> = (0..w * h * c * r * r).map(|v| v as f64).collect();
    let t = Tensor3::new(w, h, c * r * r, data).unwrap();
    let out = pixel_shuffle(&t, UpscaleFactor::new(r).unwrap()).unwrap();
    assert_eq!(out.shape(), (w * r, h * r, c));
    for y in 0..h * r {
        for x in 0..w * r {
            for ch in 0..c {
                let src_c = ch * r * r + (y % r) * r + (x % r);
                let src_index = ((y / r) * w + x / r) * (c * r * r) + src_c;
                assert_eq!(out.get(x, y, ch), src_index as f64);
            }
        }
    }
}

#[test]
fn bicubic_reproduces_linear_ramp() {
    let (w, h, factor) = (128, 16, 4);
    let img = ImageBuffer::from_fn(w, h, 1, |x, _, _| x as f32 / (w - 1) as f32).unwrap();
    let small = bicubic_downscale(&img, factor).unwrap();
    assert_eq!((small.width(), small.height()), (w / factor, h / factor));
    // Stretched kernel support is 2 * factor source pixels on each side.
    let radius = 2.0 * factor as f64;
    for o in 0..small.width() {
        let center = (o as f64 + 0.5) * factor as f64 - 0.5;
        if center - radius < 0.0 || center + radius > (w - 1) as f64 {
            continue;
        }
        let want = center / (w - 1) as f64;
        for y in 0..small.height() {
            let got = f64::from(small.get(o, y, 0));
            assert!((got - want).abs() < 1e-6, "o={o}: {got} vs {want}");
        }
    }
}

#[test]
fn exhaustive_pair_reaches_brute_force_maximum() {
    for seed in 0..3 {
        let set = generate_permutation_set(2, CandidatePool::Exhaustive, &mut Rng::new(seed)).unwrap();
        let best = oracles::max_hamming_from(&set.perms[0]);
        assert_eq!(best, 9);
        assert_eq!(usize::from(set.pairwise_hamming[0][1]), best);
        assert_eq!(set.min_hamming, 9);
    }
}

#[test]
fn dcl_composite_is_a_bijection() {
    for (n, k) in [(3, 1), (5, 2), (7, 2), (7, 1)] {
        for seed in 0..200 {
            let s = dcl_permutation(&DclParams { n, k }, &mut Rng::new(seed)).unwrap();
            assert!(oracles::is_bijection(s.composite.mapping(), n * n));
            for p in s.rows.iter().chain(&s.cols) {
                assert!(oracles::is_bijection(p, n));
            }
            assert!(s.max_displacement() < 2 * k);
        }
    }
}

#[test]
fn crop_score_matches_direct_sum() {
    let mut fx = FixtureRng(7);
    let (w, h) = (80, 72);
    let data: Vec<f32> = (0..w * h * 3).map(|_| fx.unit() as f32).collect();
    let img = ImageBuffer::new(w, h, 3, data).unwrap();
    let config = SmartcropConfig::default();
    let maps = SaliencyMaps::compute(&img, &config);
    for _ in 0..30 {
        let side = fx.range(1, 64);
        let x = fx.range(0, w - side);
        let y = fx.range(0, h - side);
        let crop = CropCandidate { x, y, side, score: 0.0 };
        let want = oracles::crop_score_direct(
            &maps.edge.data,
            &maps.saturation_boost.data,
            w,
            x,
            y,
            side,
            config.saturation_weight,
        );
        let got = score_crop(&crop, &maps);
        assert!((got - want).abs() < 1e-12 * want.max(1.0), "{got} vs {want}");
    }
}
