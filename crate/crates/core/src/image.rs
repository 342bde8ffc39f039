//! Normalized pixel buffers and 8-bit PNG / PPM file I/O.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major, channel-interleaved image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParam(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParam(format!(
                "pixel value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image by evaluating `f(x, y, channel)`; results are clamped to `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self::new(width, height, channels, data)
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * self.channels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[self.index(x, y) + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = self.index(x, y);
        &self.data[i..i + self.channels]
    }

    /// Sets one sample, clamping to `[0, 1]`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: f32) {
        let i = self.index(x, y) + c;
        self.data[i] = value.clamp(0.0, 1.0);
    }

    /// Applies `f` to every sample, clamping the result.
    pub fn map(&self, mut f: impl FnMut(f32) -> f32) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v).clamp(0.0, 1.0)).collect(),
            ..*self
        }
    }

    /// Copies the `w`x`h` rectangle at `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::InvalidParam(format!(
                "crop {w}x{h}+{x}+{y} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for row in y..y + h {
            let start = self.index(x, row);
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        Ok(Self {
            width: w,
            height: h,
            channels: self.channels,
            data,
        })
    }

    /// Writes `patch` with its top-left corner at `(x, y)`.
    pub fn paste(&mut self, patch: &ImageBuffer, x: usize, y: usize) -> Result<()> {
        if patch.channels != self.channels
            || x + patch.width > self.width
            || y + patch.height > self.height
        {
            return Err(Error::ShapeMismatch(format!(
                "cannot paste {}x{}x{} at ({x}, {y}) into {}x{}x{}",
                patch.width, patch.height, patch.channels, self.width, self.height, self.channels
            )));
        }
        let row_len = patch.width * self.channels;
        for row in 0..patch.height {
            let dst = self.index(x, y + row);
            let src = row * row_len;
            self.data[dst..dst + row_len].copy_from_slice(&patch.data[src..src + row_len]);
        }
        Ok(())
    }

    /// Largest centered crop whose sides are multiples of `n`.
    pub fn center_crop_to_multiple(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("grid order must be at least 1".into()));
        }
        let w = self.width - self.width % n;
        let h = self.height - self.height % n;
        if w == 0 || h == 0 {
            return Err(Error::TooSmall(format!(
                "{}x{} image has no {n}-divisible crop",
                self.width, self.height
            )));
        }
        self.crop((self.width - w) / 2, (self.height - h) / 2, w, h)
    }

    /// 8-bit samples, `round(v * 255)` with halves rounded up.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            bytes.iter().map(|&b| b as f32 / 255.0).collect(),
        )
    }
}

#[inline]
pub fn quantize(v: f32) -> u8 {
    // f64 keeps v * 255 exact enough that x.5 really is a half.
    (f64::from(v.clamp(0.0, 1.0)) * 255.0 + 0.5).floor() as u8
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decodes PNG or binary PPM (P6) bytes, sniffing the magic number.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else {
        Err(Error::UnsupportedFormat(
            "expected a PNG or binary PPM (P6) header".into(),
        ))
    }
}

/// Saves as PPM when the extension is `.ppm`, PNG otherwise.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_ppm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    let bytes = if is_ppm {
        encode_ppm(img)
    } else {
        encode_png(img)?
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(
            BufWriter::new(&mut out),
            img.width as u32,
            img.height as u32,
        );
        encoder.set_color(if img.channels == 3 {
            png::ColorType::Rgb
        } else {
            png::ColorType::Grayscale
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::UnsupportedFormat(format!("png encode: {e}")))?;
        writer
            .write_image_data(&img.to_u8())
            .map_err(|e| Error::UnsupportedFormat(format!("png encode: {e}")))?;
    }
    Ok(out)
}

fn decode_png(bytes: &[u8]) -> Result<ImageBuffer> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::UnsupportedFormat(format!("png: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::UnsupportedFormat("png: image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::UnsupportedFormat(format!("png: {e}")))?;
    let (width, height) = (info.width as usize, info.height as usize);
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension { width, height });
    }
    let raw = &buf[..info.buffer_size()];
    let n = width * height;
    // Alpha is dropped; gray+alpha becomes gray, RGBA becomes RGB.
    let (channels, samples): (usize, Vec<u8>) = match info.color_type {
        png::ColorType::Grayscale => (1, raw.to_vec()),
        png::ColorType::GrayscaleAlpha => (1, raw.chunks_exact(2).map(|p| p[0]).collect()),
        png::ColorType::Rgb => (3, raw.to_vec()),
        png::ColorType::Rgba => (
            3,
            raw.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        ),
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat("png: unexpanded palette".into()))
        }
    };
    if samples.len() != n * channels {
        return Err(Error::UnsupportedFormat("png: truncated pixel data".into()));
    }
    ImageBuffer::from_u8(width, height, channels, &samples)
}

pub fn encode_ppm(img: &ImageBuffer) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.width * img.height * 3 + 32);
    // PPM is always RGB; gray images are replicated.
    write!(out, "P6\n{} {}\n255\n", img.width, img.height).expect("write to Vec");
    if img.channels == 3 {
        out.extend(img.to_u8());
    } else {
        out.extend(img.to_u8().into_iter().flat_map(|v| [v, v, v]));
    }
    out
}

fn decode_ppm(bytes: &[u8]) -> Result<ImageBuffer> {
    let unsupported = |m: &str| Error::UnsupportedFormat(format!("ppm: {m}"));
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Whitespace and `#` comments may separate header fields.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(unsupported("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| unsupported("malformed header"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(unsupported("malformed header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension { width, height });
    }
    if maxval != 255 {
        return Err(unsupported("only maxval 255 is supported"));
    }
    let need = width * height * 3;
    let body = bytes
        .get(pos..pos + need)
        .ok_or_else(|| unsupported("truncated pixel data"))?;
    ImageBuffer::from_u8(width, height, 3, body)
}
