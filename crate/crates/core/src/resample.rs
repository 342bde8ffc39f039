//! Separable resampling: stretched cubic convolution for reduction,
//! bilinear for enlargement.
//!
//! Each output sample `o` on an axis of scale `s = src_len / dst_len` is
//! centered at source coordinate `(o + 0.5) * s - 0.5`. When reducing, the
//! kernel is widened by `s` so every source pixel contributes (antialiasing);
//! weights are normalized to sum to one and out-of-range taps clamp to the
//! nearest edge pixel.

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Keys' cubic convolution kernel. `a = -0.5` is Catmull-Rom.
pub fn cubic_kernel(x: f64, a: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

pub fn triangle_kernel(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Filter {
    Cubic { a: f64 },
    Triangle,
}

impl Filter {
    pub const CATMULL_ROM: Filter = Filter::Cubic { a: -0.5 };

    fn support(self) -> f64 {
        match self {
            Filter::Cubic { .. } => 2.0,
            Filter::Triangle => 1.0,
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            Filter::Cubic { a } => cubic_kernel(x, a),
            Filter::Triangle => triangle_kernel(x),
        }
    }
}

/// Tap list for one output sample.
struct Taps {
    first: usize,
    weights: Vec<f64>,
    /// Source indices, already clamped to the edge.
    indices: Vec<usize>,
}

fn axis_taps(src_len: usize, dst_len: usize, filter: Filter) -> Vec<Taps> {
    let scale = src_len as f64 / dst_len as f64;
    let stretch = scale.max(1.0);
    let radius = filter.support() * stretch;
    (0..dst_len)
        .map(|o| {
            let center = (o as f64 + 0.5) * scale - 0.5;
            let lo = (center - radius).floor() as i64;
            let hi = (center + radius).ceil() as i64;
            let mut weights = Vec::with_capacity((hi - lo + 1) as usize);
            let mut indices = Vec::with_capacity(weights.capacity());
            for i in lo..=hi {
                let w = filter.eval((i as f64 - center) / stretch);
                if w != 0.0 {
                    weights.push(w);
                    indices.push(i.clamp(0, src_len as i64 - 1) as usize);
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Taps {
                first: o,
                weights,
                indices,
            }
        })
        .collect()
}

fn resample_rows(
    src: &[f64],
    width: usize,
    height: usize,
    channels: usize,
    dst_width: usize,
    filter: Filter,
) -> Vec<f64> {
    let taps = axis_taps(width, dst_width, filter);
    let mut out = vec![0.0; dst_width * height * channels];
    for y in 0..height {
        for t in &taps {
            for c in 0..channels {
                let acc: f64 = t
                    .weights
                    .iter()
                    .zip(&t.indices)
                    .map(|(w, &i)| w * src[(y * width + i) * channels + c])
                    .sum();
                out[(y * dst_width + t.first) * channels + c] = acc;
            }
        }
    }
    out
}

fn resample_cols(
    src: &[f64],
    width: usize,
    height: usize,
    channels: usize,
    dst_height: usize,
    filter: Filter,
) -> Vec<f64> {
    let taps = axis_taps(height, dst_height, filter);
    let mut out = vec![0.0; width * dst_height * channels];
    for t in &taps {
        for x in 0..width {
            for c in 0..channels {
                let acc: f64 = t
                    .weights
                    .iter()
                    .zip(&t.indices)
                    .map(|(w, &i)| w * src[(i * width + x) * channels + c])
                    .sum();
                out[(t.first * width + x) * channels + c] = acc;
            }
        }
    }
    out
}

/// Separable resample with an explicit filter per axis.
pub fn resample(
    img: &ImageBuffer,
    dst_width: usize,
    dst_height: usize,
    horizontal: Filter,
    vertical: Filter,
) -> Result<ImageBuffer> {
    if dst_width == 0 || dst_height == 0 {
        return Err(Error::ZeroDimension {
            width: dst_width,
            height: dst_height,
        });
    }
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let src: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    let rows = if dst_width == w {
        src
    } else {
        resample_rows(&src, w, h, c, dst_width, horizontal)
    };
    let both = if dst_height == h {
        rows
    } else {
        resample_cols(&rows, dst_width, h, c, dst_height, vertical)
    };
    ImageBuffer::new(
        dst_width,
        dst_height,
        c,
        both.into_iter().map(|v| v.clamp(0.0, 1.0) as f32).collect(),
    )
}

/// Resize: cubic (`a = -0.5`) on axes that shrink, bilinear on axes that grow.
pub fn resize(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    let pick = |src: usize, dst: usize| {
        if dst < src {
            Filter::CATMULL_ROM
        } else {
            Filter::Triangle
        }
    };
    resample(
        img,
        width,
        height,
        pick(img.width(), width),
        pick(img.height(), height),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_kernel_interpolates() {
        assert_eq!(cubic_kernel(0.0, -0.5), 1.0);
        assert_eq!(cubic_kernel(1.0, -0.5), 0.0);
        assert_eq!(cubic_kernel(2.0, -0.5), 0.0);
        // Catmull-Rom at 1/2: 9/16 and -1/16.
        assert!((cubic_kernel(0.5, -0.5) - 0.5625).abs() < 1e-15);
        assert!((cubic_kernel(1.5, -0.5) + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn taps_are_normalized() {
        for &(s, d) in &[(16, 4), (10, 3), (3, 10), (7, 7)] {
            for t in axis_taps(s, d, Filter::CATMULL_ROM) {
                let sum: f64 = t.weights.iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn upscale_of_constant_is_constant() {
        let img = ImageBuffer::filled(3, 5, 3, 0.3).unwrap();
        let out = resize(&img, 7, 11).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.3).abs() < 1e-6));
    }

    #[test]
    fn same_size_is_identity() {
        let img = ImageBuffer::from_fn(5, 4, 1, |x, y, _| ((x * 3 + y) % 5) as f32 / 4.0).unwrap();
        assert_eq!(resize(&img, 5, 4).unwrap(), img);
    }

    #[test]
    fn bilinear_upscale_midpoints() {
        let img = ImageBuffer::new(2, 1, 1, vec![0.0, 1.0]).unwrap();
        let out = resize(&img, 4, 1).unwrap();
        // Centers at -0.25, 0.25, 0.75, 1.25 in source space, edges clamped.
        let expected = [0.0, 0.25, 0.75, 1.0];
        for (a, b) in out.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}
