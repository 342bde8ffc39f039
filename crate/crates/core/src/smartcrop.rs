//! Content-aware square cropping.
//!
//! Edges come from a Laplacian of luminance, saturated regions get a boost,
//! and square windows at several scales are ranked by a center-weighted sum
//! of the two maps. All constants live in [`SmartcropConfig`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmartcropConfig {
    /// Luminance weights for R, G, B.
    pub luma: [f64; 3],
    pub saturation_threshold: f64,
    pub saturation_weight: f64,
    /// Crop side as a fraction of the shorter image side.
    pub scales: Vec<f64>,
    pub min_stride: usize,
    /// Stride is `max(min_stride, side / stride_divisor)`.
    pub stride_divisor: usize,
    pub min_image_side: usize,
}

impl Default for SmartcropConfig {
    fn default() -> Self {
        Self {
            luma: [0.299, 0.587, 0.114],
            saturation_threshold: 0.1,
            saturation_weight: 0.3,
            scales: vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5],
            min_stride: 8,
            stride_divisor: 8,
            min_image_side: 64,
        }
    }
}

impl SmartcropConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::InvalidParam(
                "smartcrop scales must be non-empty and lie in (0, 1]".into(),
            ));
        }
        if self.min_stride == 0 || self.stride_divisor == 0 {
            return Err(Error::InvalidParam(
                "smartcrop stride parameters must be positive".into(),
            ));
        }
        if self.saturation_weight < 0.0 || self.luma.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidParam(
                "smartcrop weights must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major `width x height` field of non-negative reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl SaliencyMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * alpha).collect(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMaps {
    pub edge: SaliencyMap,
    pub saturation_boost: SaliencyMap,
}

impl SaliencyMaps {
    pub fn compute(img: &ImageBuffer, config: &SmartcropConfig) -> Self {
        Self {
            edge: laplace_edges_with(img, config),
            saturation_boost: saturation_boost_with(img, config),
        }
    }

    pub fn width(&self) -> usize {
        self.edge.width
    }

    pub fn height(&self) -> usize {
        self.edge.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropCandidate {
    pub x: usize,
    pub y: usize,
    pub side: usize,
    pub score: f64,
}

pub fn luminance(img: &ImageBuffer, luma: [f64; 3]) -> Vec<f64> {
    let c = img.channels();
    img.data()
        .chunks_exact(c)
        .map(|p| {
            if c == 3 {
                luma[0] * f64::from(p[0]) + luma[1] * f64::from(p[1]) + luma[2] * f64::from(p[2])
            } else {
                f64::from(p[0])
            }
        })
        .collect()
}

pub fn laplace_edges(img: &ImageBuffer) -> SaliencyMap {
    laplace_edges_with(img, &SmartcropConfig::default())
}

/// `|4Y - Y_left - Y_right - Y_up - Y_down|` with clamp-to-edge borders.
pub fn laplace_edges_with(img: &ImageBuffer, config: &SmartcropConfig) -> SaliencyMap {
    let (w, h) = (img.width(), img.height());
    let lum = luminance(img, config.luma);
    let at = |x: usize, y: usize| lum[y * w + x];
    let mut out = SaliencyMap::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let l = at(x.saturating_sub(1), y);
            let r = at((x + 1).min(w - 1), y);
            let u = at(x, y.saturating_sub(1));
            let d = at(x, (y + 1).min(h - 1));
            let c = at(x, y);
            out.data[y * w + x] = ((c - l) + (c - r) + (c - u) + (c - d)).abs();
        }
    }
    out
}

pub fn saturation_boost(img: &ImageBuffer) -> SaliencyMap {
    saturation_boost_with(img, &SmartcropConfig::default())
}

/// `max(R,G,B) - min(R,G,B)` where it exceeds the threshold, else 0.
/// Gray images give an all-zero map.
pub fn saturation_boost_with(img: &ImageBuffer, config: &SmartcropConfig) -> SaliencyMap {
    let (w, h) = (img.width(), img.height());
    if img.channels() != 3 {
        return SaliencyMap::zeros(w, h);
    }
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| {
            let max = p[0].max(p[1]).max(p[2]);
            let min = p[0].min(p[1]).min(p[2]);
            let s = f64::from(max) - f64::from(min);
            if s > config.saturation_threshold {
                s
            } else {
                0.0
            }
        })
        .collect();
    SaliencyMap {
        width: w,
        height: h,
        data,
    }
}

pub fn candidate_crops(width: usize, height: usize) -> Result<Vec<CropCandidate>> {
    candidate_crops_with(width, height, &SmartcropConfig::default())
}

/// Square sliding windows at every configured scale, all inside the image.
pub fn candidate_crops_with(
    width: usize,
    height: usize,
    config: &SmartcropConfig,
) -> Result<Vec<CropCandidate>> {
    config.validate()?;
    let short = width.min(height);
    if short < config.min_image_side {
        return Err(Error::TooSmall(format!(
            "smartcrop needs at least {0}x{0} pixels, got {width}x{height}",
            config.min_image_side
        )));
    }
    let mut out = Vec::new();
    for &scale in &config.scales {
        let side = ((scale * short as f64).round() as usize).clamp(1, short);
        let stride = config.min_stride.max(side / config.stride_divisor);
        for y in (0..=height - side).step_by(stride) {
            for x in (0..=width - side).step_by(stride) {
                out.push(CropCandidate {
                    x,
                    y,
                    side,
                    score: 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// Per-offset weights `max(0, 1 - t^2)` along one axis, where `t` runs
/// over pixel centers from -1 to 1. The 2-D weight is
/// `max(0, 1 - max(|u|, |v|)^2) = min(w(u), w(v))`.
fn axis_weights(side: usize) -> Vec<f64> {
    (0..side)
        .map(|i| {
            let t = (i as f64 + 0.5) / side as f64 * 2.0 - 1.0;
            (1.0 - t * t).max(0.0)
        })
        .collect()
}

pub fn score_crop(crop: &CropCandidate, maps: &SaliencyMaps) -> f64 {
    score_crop_with(crop, maps, &SmartcropConfig::default())
}

/// Center-weighted saliency mass per unit area.
pub fn score_crop_with(crop: &CropCandidate, maps: &SaliencyMaps, config: &SmartcropConfig) -> f64 {
    let weights = axis_weights(crop.side);
    score_with_weights(crop, maps, config.saturation_weight, &weights)
}

fn score_with_weights(
    crop: &CropCandidate,
    maps: &SaliencyMaps,
    saturation_weight: f64,
    weights: &[f64],
) -> f64 {
    let w = maps.width();
    let mut total = 0.0;
    for (dy, &wy) in weights.iter().enumerate() {
        let row = (crop.y + dy) * w + crop.x;
        let edge = &maps.edge.data[row..row + crop.side];
        let sat = &maps.saturation_boost.data[row..row + crop.side];
        for ((&wx, &e), &s) in weights.iter().zip(edge).zip(sat) {
            let v = e + saturation_weight * s;
            if v != 0.0 {
                total += v * wx.min(wy);
            }
        }
    }
    total / (crop.side * crop.side) as f64
}

/// `a` beats `b`: higher score, then larger side, then smaller y, then smaller x.
fn outranks(a: &CropCandidate, b: &CropCandidate) -> bool {
    a.score
        .total_cmp(&b.score)
        .then(a.side.cmp(&b.side))
        .then(b.y.cmp(&a.y))
        .then(b.x.cmp(&a.x))
        .is_gt()
}

/// Scores every candidate and returns the winner.
pub fn best_crop(maps: &SaliencyMaps, config: &SmartcropConfig) -> Result<CropCandidate> {
    let mut candidates = candidate_crops_with(maps.width(), maps.height(), config)?;
    let mut weights_for: Option<(usize, Vec<f64>)> = None;
    let mut best: Option<CropCandidate> = None;
    for c in candidates.iter_mut() {
        if weights_for.as_ref().map(|(s, _)| *s) != Some(c.side) {
            weights_for = Some((c.side, axis_weights(c.side)));
        }
        let (_, weights) = weights_for.as_ref().expect("set above");
        c.score = score_with_weights(c, maps, config.saturation_weight, weights);
        if best.as_ref().is_none_or(|b| outranks(c, b)) {
            best = Some(*c);
        }
    }
    best.ok_or_else(|| Error::EmptyInput("no candidate crops".into()))
}

pub fn smart_crop(img: &ImageBuffer) -> Result<CropCandidate> {
    smart_crop_with(img, &SmartcropConfig::default())
}

pub fn smart_crop_with(img: &ImageBuffer, config: &SmartcropConfig) -> Result<CropCandidate> {
    config.validate()?;
    candidate_crops_with(img.width(), img.height(), config)?;
    best_crop(&SaliencyMaps::compute(img, config), config)
}

/// Keeps the crop at its original position and paints everything else white.
pub fn overlay_on_white(img: &ImageBuffer, crop: &CropCandidate) -> Result<ImageBuffer> {
    if crop.side == 0 || crop.x + crop.side > img.width() || crop.y + crop.side > img.height() {
        return Err(Error::InvalidParam(format!(
            "crop {}x{0}+{}+{} outside {}x{} image",
            crop.side,
            crop.x,
            crop.y,
            img.width(),
            img.height()
        )));
    }
    let patch = img.crop(crop.x, crop.y, crop.side, crop.side)?;
    let mut out = ImageBuffer::filled(img.width(), img.height(), img.channels(), 1.0)?;
    out.paste(&patch, crop.x, crop.y)?;
    Ok(out)
}
