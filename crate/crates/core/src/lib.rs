//! Building blocks for self-supervised fine-grained image pipelines.
//!
//! - [`image`], [`grid`], [`resample`], [`rng`]: pixel buffers, file I/O,
//!   region grids, resizing and the seeded random stream everything uses.
//! - [`augment`]: gamma, coarse dropout, patch swap, random and DCL jigsaw.
//! - [`smartcrop`]: saliency-driven square crops and white overlays.
//! - [`permset`]: Hamming-separated permutation sets and jigsaw samples.
//! - [`contrastive`]: the NT-Xent loss.
//! - [`sr`]: bicubic reduction, pixel shuffle, content and perceptual losses.
//! - [`dataset`], [`metrics`]: manifests, splits, class weights, reports.

pub mod augment;
pub mod contrastive;
pub mod dataset;
pub mod error;
pub mod grid;
pub mod image;
pub mod metrics;
pub mod permset;
pub mod resample;
pub mod rng;
pub mod smartcrop;
pub mod sr;

pub use error::{Error, Result};
pub use grid::{apply_grid_permutation, partition, GridPermutation, RegionGrid};
pub use image::{load_image, save_image, ImageBuffer};
pub use rng::{RandomSource, Rng};
