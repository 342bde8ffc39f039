//! Super-resolution kernels: bicubic reduction, pixel shuffle, and the
//! pixel / feature content losses with their perceptual combination.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::resample::{resample, Filter};

/// Weight of the adversarial term in the perceptual loss.
pub const ADVERSARIAL_WEIGHT: f64 = 1e-3;

/// `W x H x C` reals, row-major with interleaved channels:
/// element `(x, y, c)` lives at `(y * W + x) * C + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::ShapeMismatch(format!(
                "tensor dimensions must be positive, got {width}x{height}x{channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height}x{channels} tensor needs {} values, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::new(width, height, channels, vec![0.0; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Reads the CSV form: a first row `W,H,C`, then one row of `C` values
    /// per pixel in row-major order.
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let parse_row = |(no, line): (usize, std::io::Result<String>)| -> Result<Vec<f64>> {
            let line = line.map_err(|e| Error::parse("tensor csv", e.to_string()))?;
            line.split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| {
                        Error::parse("tensor csv", format!("line {}: `{}`: {e}", no + 1, f.trim()))
                    })
                })
                .collect()
        };
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("tensor csv", "missing W,H,C header"))
            .and_then(parse_row)?;
        let [w, h, c] = header[..] else {
            return Err(Error::parse("tensor csv", "header must be W,H,C"));
        };
        let dims: Vec<usize> = [w, h, c]
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::parse("tensor csv", format!("bad dimension {v}")))
                }
            })
            .collect::<Result<_>>()?;
        let (w, h, c) = (dims[0], dims[1], dims[2]);
        let mut data = Vec::with_capacity(w * h * c);
        for row in lines {
            let values = parse_row(row)?;
            if values.len() != c {
                return Err(Error::parse(
                    "tensor csv",
                    format!("pixel row has {} values, expected {c}", values.len()),
                ));
            }
            data.extend(values);
        }
        Self::new(w, h, c, data)
    }

    pub fn write_csv(&self, mut writer: impl Write) -> std::io::Result<()> {
        writeln!(writer, "{},{},{}", self.width, self.height, self.channels)?;
        for px in self.data.chunks_exact(self.channels) {
            let row: Vec<String> = px.iter().map(|v| format!("{v:?}")).collect();
            writeln!(writer, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl From<&ImageBuffer> for Tensor3 {
    fn from(img: &ImageBuffer) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            channels: img.channels(),
            data: img.data().iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct UpscaleFactor(usize);

impl UpscaleFactor {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            Err(Error::InvalidParam("upscale factor must be at least 1".into()))
        } else {
            Ok(Self(r))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for UpscaleFactor {
    type Error = Error;

    fn try_from(r: usize) -> Result<Self> {
        Self::new(r)
    }
}

impl From<UpscaleFactor> for usize {
    fn from(r: UpscaleFactor) -> usize {
        r.0
    }
}

/// Bicubic (`a = -0.5`) reduction by an integer factor with edge clamping.
pub fn bicubic_downscale(img: &ImageBuffer, factor: usize) -> Result<ImageBuffer> {
    bicubic_downscale_with(img, factor, -0.5)
}

pub fn bicubic_downscale_with(img: &ImageBuffer, factor: usize, a: f64) -> Result<ImageBuffer> {
    if factor == 0 {
        return Err(Error::InvalidParam("downscale factor must be at least 1".into()));
    }
    for (dimension, size) in [("width", img.width()), ("height", img.height())] {
        if size % factor != 0 {
            return Err(Error::NotDivisible {
                dimension,
                size,
                divisor: factor,
            });
        }
    }
    let filter = Filter::Cubic { a };
    resample(img, img.width() / factor, img.height() / factor, filter, filter)
}

/// `(W, H, C r^2) -> (W r, H r, C)` with
/// `out(x r + dx, y r + dy, ch) = in(x, y, ch r^2 + dy r + dx)`.
pub fn pixel_shuffle(t: &Tensor3, r: UpscaleFactor) -> Result<Tensor3> {
    let r = r.get();
    let rr = r * r;
    if !t.channels.is_multiple_of(rr) {
        return Err(Error::NotDivisible {
            dimension: "channels",
            size: t.channels,
            divisor: rr,
        });
    }
    let c_out = t.channels / rr;
    let mut out = Tensor3::zeros(t.width * r, t.height * r, c_out)?;
    for y in 0..t.height {
        for x in 0..t.width {
            for ch in 0..c_out {
                for dy in 0..r {
                    for dx in 0..r {
                        out.set(x * r + dx, y * r + dy, ch, t.get(x, y, ch * rr + dy * r + dx));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`pixel_shuffle`].
pub fn pixel_unshuffle(t: &Tensor3, r: UpscaleFactor) -> Result<Tensor3> {
    let r = r.get();
    for (dimension, size) in [("width", t.width), ("height", t.height)] {
        if size % r != 0 {
            return Err(Error::NotDivisible {
                dimension,
                size,
                divisor: r,
            });
        }
    }
    let rr = r * r;
    let mut out = Tensor3::zeros(t.width / r, t.height / r, t.channels * rr)?;
    for y in 0..out.height {
        for x in 0..out.width {
            for ch in 0..t.channels {
                for dy in 0..r {
                    for dx in 0..r {
                        out.set(x, y, ch * rr + dy * r + dx, t.get(x * r + dx, y * r + dy, ch));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// How the channel axis enters the content-loss normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelNorm {
    /// Divide by the channel count as well as the spatial extent.
    #[default]
    Mean,
    /// Sum over channels; divide by the spatial extent only.
    Sum,
}

fn squared_error(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

/// Pixel-space content loss `1/(r^2 W H) * sum (hr - sr)^2` where `W x H`
/// is the low-resolution size. With [`ChannelNorm::Mean`] the sum over
/// channels is also divided by `C`.
pub fn mse_content_loss(
    hr: &Tensor3,
    sr: &Tensor3,
    r: UpscaleFactor,
    lr_width: usize,
    lr_height: usize,
    norm: ChannelNorm,
) -> Result<f64> {
    let r = r.get();
    let expected = (r * lr_width, r * lr_height);
    if (hr.width, hr.height) != expected {
        return Err(Error::ShapeMismatch(format!(
            "high-resolution tensor is {}x{}, expected {}x{}",
            hr.width, hr.height, expected.0, expected.1
        )));
    }
    let sse = squared_error(hr, sr)?;
    let mut denom = (r * r * lr_width * lr_height) as f64;
    if norm == ChannelNorm::Mean {
        denom *= hr.channels as f64;
    }
    Ok(sse / denom)
}

/// Feature-space content loss `1/(W H) * sum (phi_hr - phi_sr)^2` over
/// feature maps of spatial size `W x H`. [`ChannelNorm::Sum`] is the
/// literal form.
pub fn feature_content_loss(phi_hr: &Tensor3, phi_sr: &Tensor3, norm: ChannelNorm) -> Result<f64> {
    let sse = squared_error(phi_hr, phi_sr)?;
    let mut denom = (phi_hr.width * phi_hr.height) as f64;
    if norm == ChannelNorm::Mean {
        denom *= phi_hr.channels as f64;
    }
    Ok(sse / denom)
}

/// `content + 1e-3 * adversarial`.
pub fn perceptual_loss(content: f64, adversarial: f64) -> f64 {
    content + ADVERSARIAL_WEIGHT * adversarial
}
