//! Synthetic image corpora and helpers for driving the `finegrain` binary.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use finegrain_core::{save_image, ImageBuffer};

pub const CLASSES: [&str; 5] = ["cbb", "cbsd", "cgm", "cmd", "healthy"];

/// A leaf-like scene: smooth background, one textured colored blob whose
/// position and hue depend on `i`.
pub fn synthetic_image(i: usize, width: usize, height: usize) -> ImageBuffer {
    let cx = (17 + i * 37) % width;
    let cy = (11 + i * 53) % height;
    let radius = 10 + (i % 5) * 3;
    let hue = (i % 7) as f32 / 7.0;
    ImageBuffer::from_fn(width, height, 3, move |x, y, c| {
        let base = 0.25 + 0.5 * (x + y) as f32 / (width + height) as f32;
        let dx = x as f32 - cx as f32;
        let dy = y as f32 - cy as f32;
        if dx * dx + dy * dy <= (radius * radius) as f32 {
            let stripe = if (x / 2 + y / 3 + c) % 2 == 0 { 0.15 } else { -0.15 };
            (0.5 + 0.3 * ((hue + c as f32 / 3.0) * std::f32::consts::TAU).sin() + stripe).clamp(0.0, 1.0)
        } else {
            base * [0.6, 0.9, 0.5][c]
        }
    })
    .unwrap()
}

/// Writes `count` images under `<dir>/images/<class>/img_<i>.png` plus
/// `<dir>/manifest.csv`, classes assigned round-robin.
pub fn write_corpus(dir: &Path, count: usize, width: usize, height: usize) -> PathBuf {
    let mut manifest = String::from("path,label\n");
    for i in 0..count {
        let class = CLASSES[i % CLASSES.len()];
        let rel = format!("images/{class}/img_{i:03}.png");
        let path = dir.join(&rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        save_image(&synthetic_image(i, width, height), &path).unwrap();
        manifest.push_str(&format!("{rel},{class}\n"));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest).unwrap();
    manifest_path
}

pub fn finegrain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finegrain"))
        .args(args)
        .output()
        .expect("spawn finegrain")
}

/// Every regular file under `root`, keyed by its `/`-joined relative path.
pub fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Drops the wall-clock field from run reports so trees can be compared.
pub fn without_timing(name: &str, bytes: &[u8]) -> Vec<u8> {
    if !name.ends_with("report.json") {
        return bytes.to_vec();
    }
    let Ok(mut value) = serde_json::from_slice::<serde_json::Value>(bytes) else {
        return bytes.to_vec();
    };
    if let Some(obj) = value.as_object_mut() {
        obj.remove("elapsed_ms");
    }
    serde_json::to_vec(&value).unwrap()
}
