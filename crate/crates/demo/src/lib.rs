//! Browser bindings over RGBA canvas buffers. The page draws every image
//! into a square canvas whose side divides evenly by the grid sizes it
//! offers, so grid operations never need to crop.

use finegrain_core::augment::{apply_gamma, dcl_jigsaw, random_jigsaw, DclParams};
use finegrain_core::smartcrop::{overlay_on_white, smart_crop, CropCandidate, SaliencyMaps, SmartcropConfig};
use finegrain_core::{ImageBuffer, Rng};
use wasm_bindgen::prelude::*;

pub fn from_rgba(rgba: &[u8], width: usize, height: usize) -> Result<ImageBuffer, String> {
    if rgba.len() != width * height * 4 {
        return Err(format!("expected {} RGBA bytes, got {}", width * height * 4, rgba.len()));
    }
    let rgb: Vec<u8> = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    ImageBuffer::from_u8(width, height, 3, &rgb).map_err(|e| e.to_string())
}

pub fn to_rgba(img: &ImageBuffer) -> Vec<u8> {
    let bytes = img.to_u8();
    match img.channels() {
        1 => bytes.iter().flat_map(|&v| [v, v, v, 255]).collect(),
        _ => bytes.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect(),
    }
}

/// A synthetic leaf with a few lesions, for when no photo is loaded.
pub fn sample_leaf_rgba(side: usize, seed: u64) -> Vec<u8> {
    use finegrain_core::RandomSource;
    let mut rng = Rng::new(seed);
    let spots: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| (rng.uniform_range(0.25, 0.75), rng.uniform_range(0.3, 0.7), rng.uniform_range(0.03, 0.07)))
        .collect();
    let img = ImageBuffer::from_fn(side, side, 3, |x, y, c| {
        let u = x as f64 / side as f64;
        let v = y as f64 / side as f64;
        if ((u - 0.5) / 0.42).powi(2) + ((v - 0.5) / 0.3).powi(2) > 1.0 {
            return [0.93, 0.92, 0.88][c];
        }
        for &(sx, sy, r) in &spots {
            let d = ((u - sx).powi(2) + (v - sy).powi(2)).sqrt();
            if d < r {
                return [0.55, 0.45, 0.12][c] * (0.8 + 0.4 * (d / r) as f32);
            }
        }
        let vein = (v - 0.5).abs() < 0.006 || (u * 9.0 + (v - 0.5).abs() * 6.0).fract() < 0.04;
        let green = [0.22, 0.55, 0.18][c];
        if vein {
            green * 1.35
        } else {
            green
        }
    })
    .expect("valid dimensions");
    to_rgba(&img)
}

pub fn dcl_rgba(rgba: &[u8], width: usize, height: usize, n: usize, k: usize, seed: u64) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    let (out, _) = dcl_jigsaw(&img, &DclParams { n, k }, &mut Rng::new(seed)).map_err(|e| e.to_string())?;
    Ok(to_rgba(&out))
}

pub fn jigsaw_rgba(rgba: &[u8], width: usize, height: usize, n: usize, seed: u64) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    let (out, _) = random_jigsaw(&img, n, &mut Rng::new(seed)).map_err(|e| e.to_string())?;
    Ok(to_rgba(&out))
}

pub fn gamma_rgba(rgba: &[u8], width: usize, height: usize, level: u32) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    Ok(to_rgba(&apply_gamma(&img, f64::from(level) / 100.0)))
}

pub fn crop_of(rgba: &[u8], width: usize, height: usize) -> Result<CropCandidate, String> {
    smart_crop(&from_rgba(rgba, width, height)?).map_err(|e| e.to_string())
}

pub fn overlay_rgba(rgba: &[u8], width: usize, height: usize) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    let crop = smart_crop(&img).map_err(|e| e.to_string())?;
    Ok(to_rgba(&overlay_on_white(&img, &crop).map_err(|e| e.to_string())?))
}

/// Edge response in red, saturation boost in green, each scaled to its maximum.
pub fn saliency_rgba(rgba: &[u8], width: usize, height: usize) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    let maps = SaliencyMaps::compute(&img, &SmartcropConfig::default());
    let peak = |d: &[f64]| d.iter().copied().fold(0.0, f64::max).max(1e-12);
    let (pe, ps) = (peak(&maps.edge.data), peak(&maps.saturation_boost.data));
    Ok(maps
        .edge
        .data
        .iter()
        .zip(&maps.saturation_boost.data)
        .flat_map(|(&e, &s)| {
            let e = ((e / pe).sqrt() * 255.0).round() as u8;
            let s = ((s / ps) * 160.0).round() as u8;
            [e, s, 0, 255]
        })
        .collect())
}

fn js(r: Result<Vec<u8>, String>) -> Result<Vec<u8>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sample_leaf(side: usize, seed: u64) -> Vec<u8> {
    sample_leaf_rgba(side, seed)
}

#[wasm_bindgen]
pub fn dcl(rgba: &[u8], width: usize, height: usize, n: usize, k: usize, seed: u64) -> Result<Vec<u8>, JsError> {
    js(dcl_rgba(rgba, width, height, n, k, seed))
}

#[wasm_bindgen]
pub fn jigsaw(rgba: &[u8], width: usize, height: usize, n: usize, seed: u64) -> Result<Vec<u8>, JsError> {
    js(jigsaw_rgba(rgba, width, height, n, seed))
}

#[wasm_bindgen]
pub fn gamma(rgba: &[u8], width: usize, height: usize, level: u32) -> Result<Vec<u8>, JsError> {
    js(gamma_rgba(rgba, width, height, level))
}

#[wasm_bindgen]
pub fn smartcrop_overlay(rgba: &[u8], width: usize, height: usize) -> Result<Vec<u8>, JsError> {
    js(overlay_rgba(rgba, width, height))
}

#[wasm_bindgen]
pub fn saliency(rgba: &[u8], width: usize, height: usize) -> Result<Vec<u8>, JsError> {
    js(saliency_rgba(rgba, width, height))
}

/// `[x, y, side]` of the chosen crop.
#[wasm_bindgen]
pub fn smartcrop_rect(rgba: &[u8], width: usize, height: usize) -> Result<Vec<u32>, JsError> {
    let c = crop_of(rgba, width, height).map_err(|e| JsError::new(&e))?;
    Ok(vec![c.x as u32, c.y as u32, c.side as u32])
}
