//! The registered image operations and pair recipes.

use std::fmt;
use std::str::FromStr;

use anyhow::Result;
use finegrain_core::augment::{coarse_dropout, dcl_jigsaw, gamma_transform, patch_swap, random_jigsaw};
use finegrain_core::smartcrop::{overlay_on_white, smart_crop_with, CropCandidate};
use finegrain_core::{GridPermutation, ImageBuffer, Rng};

use crate::config::OpParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentOp {
    Gamma,
    CoarseDropout,
    PatchSwap,
    RandomJigsaw,
    Dcl,
    SmartcropOverlay,
    /// Keep the smartcrop region in place and jigsaw-shuffle the rest.
    SmartcropShuffle,
}

impl AugmentOp {
    pub const ALL: [AugmentOp; 7] = [
        AugmentOp::Gamma,
        AugmentOp::CoarseDropout,
        AugmentOp::PatchSwap,
        AugmentOp::RandomJigsaw,
        AugmentOp::Dcl,
        AugmentOp::SmartcropOverlay,
        AugmentOp::SmartcropShuffle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentOp::Gamma => "gamma",
            AugmentOp::CoarseDropout => "coarse-dropout",
            AugmentOp::PatchSwap => "patch-swap",
            AugmentOp::RandomJigsaw => "random-jigsaw",
            AugmentOp::Dcl => "dcl",
            AugmentOp::SmartcropOverlay => "smartcrop-overlay",
            AugmentOp::SmartcropShuffle => "smartcrop-shuffle",
        }
    }

    pub fn apply(self, img: &ImageBuffer, params: &OpParams, rng: &mut Rng) -> Result<View> {
        let view = match self {
            AugmentOp::Gamma => View::plain(gamma_transform(img, &params.gamma, rng)?),
            AugmentOp::CoarseDropout => View::plain(coarse_dropout(img, &params.dropout, rng)?),
            AugmentOp::PatchSwap => View::plain(patch_swap(img, &params.patch_swap, rng)?),
            AugmentOp::RandomJigsaw => {
                let (out, perm) = random_jigsaw(img, params.jigsaw_n, rng)?;
                View::permuted(out, perm)
            }
            AugmentOp::Dcl => {
                let (out, perm) = dcl_jigsaw(img, &params.dcl, rng)?;
                View::permuted(out, perm)
            }
            AugmentOp::SmartcropOverlay => {
                let crop = smart_crop_with(img, &params.smartcrop)?;
                View {
                    image: overlay_on_white(img, &crop)?,
                    permutation: None,
                    crop: Some(crop),
                }
            }
            AugmentOp::SmartcropShuffle => {
                let crop = smart_crop_with(img, &params.smartcrop)?;
                let (mut out, perm) = random_jigsaw(img, params.jigsaw_n, rng)?;
                out.paste(&img.crop(crop.x, crop.y, crop.side, crop.side)?, crop.x, crop.y)?;
                View {
                    image: out,
                    permutation: Some(perm),
                    crop: Some(crop),
                }
            }
        };
        Ok(view)
    }
}

impl fmt::Display for AugmentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|op| op.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|op| op.name()).collect();
            format!("unknown operation `{s}` (expected one of: {})", names.join(", "))
        })
    }
}

/// One output image plus whatever produced it.
#[derive(Debug, Clone)]
pub struct View {
    pub image: ImageBuffer,
    pub permutation: Option<GridPermutation>,
    pub crop: Option<CropCandidate>,
}

impl View {
    fn plain(image: ImageBuffer) -> Self {
        Self {
            image,
            permutation: None,
            crop: None,
        }
    }

    fn permuted(image: ImageBuffer, perm: GridPermutation) -> Self {
        Self {
            image,
            permutation: Some(perm),
            crop: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairVariant {
    OriginalGamma,
    OriginalDcl,
    OriginalRandomJigsaw,
    Jigsaw4x4Jigsaw2x2,
    OriginalPatchSwap,
    OriginalCoarseDropout,
    OriginalSmartcropOverlay,
}

impl PairVariant {
    pub const ALL: [PairVariant; 7] = [
        PairVariant::OriginalGamma,
        PairVariant::OriginalDcl,
        PairVariant::OriginalRandomJigsaw,
        PairVariant::Jigsaw4x4Jigsaw2x2,
        PairVariant::OriginalPatchSwap,
        PairVariant::OriginalCoarseDropout,
        PairVariant::OriginalSmartcropOverlay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairVariant::OriginalGamma => "original+gamma",
            PairVariant::OriginalDcl => "original+dcl",
            PairVariant::OriginalRandomJigsaw => "original+random-jigsaw",
            PairVariant::Jigsaw4x4Jigsaw2x2 => "jigsaw4x4+jigsaw2x2",
            PairVariant::OriginalPatchSwap => "original+patchswap",
            PairVariant::OriginalCoarseDropout => "original+coarsedropout",
            PairVariant::OriginalSmartcropOverlay => "original+smartcrop-overlay",
        }
    }

    /// Builds both views. `rng_a` and `rng_b` are independent streams.
    pub fn apply(
        self,
        img: &ImageBuffer,
        params: &OpParams,
        rng_a: &mut Rng,
        rng_b: &mut Rng,
    ) -> Result<(View, View)> {
        let original = || View::plain(img.clone());
        let with = |op: AugmentOp, rng: &mut Rng| op.apply(img, params, rng);
        Ok(match self {
            PairVariant::OriginalGamma => (original(), with(AugmentOp::Gamma, rng_b)?),
            PairVariant::OriginalDcl => (original(), with(AugmentOp::Dcl, rng_b)?),
            PairVariant::OriginalRandomJigsaw => (original(), with(AugmentOp::RandomJigsaw, rng_b)?),
            PairVariant::Jigsaw4x4Jigsaw2x2 => {
                let (a, pa) = random_jigsaw(img, 4, rng_a)?;
                let (b, pb) = random_jigsaw(img, 2, rng_b)?;
                (View::permuted(a, pa), View::permuted(b, pb))
            }
            PairVariant::OriginalPatchSwap => (original(), with(AugmentOp::PatchSwap, rng_b)?),
            PairVariant::OriginalCoarseDropout => (original(), with(AugmentOp::CoarseDropout, rng_b)?),
            PairVariant::OriginalSmartcropOverlay => {
                (original(), with(AugmentOp::SmartcropOverlay, rng_b)?)
            }
        })
    }
}

impl fmt::Display for PairVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
            format!("unknown pair variant `{s}` (expected one of: {})", names.join(", "))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for op in AugmentOp::ALL {
            assert_eq!(op.name().parse::<AugmentOp>().unwrap(), op);
        }
        for v in PairVariant::ALL {
            assert_eq!(v.name().parse::<PairVariant>().unwrap(), v);
        }
        assert!("blur".parse::<AugmentOp>().is_err());
    }

    #[test]
    fn smartcrop_shuffle_keeps_crop_region() {
        let img = ImageBuffer::from_fn(96, 96, 3, |x, y, c| ((x * 7 + y * 13 + c * 5) % 97) as f32 / 96.0).unwrap();
        let params = OpParams::default();
        let view = AugmentOp::SmartcropShuffle.apply(&img, &params, &mut Rng::new(3)).unwrap();
        let c = view.crop.unwrap();
        assert_eq!(
            view.image.crop(c.x, c.y, c.side, c.side).unwrap(),
            img.crop(c.x, c.y, c.side, c.side).unwrap()
        );
    }
}
