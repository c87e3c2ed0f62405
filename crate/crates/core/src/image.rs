//! Planar floating-point images.
//!
//! Every image in the toolkit (heatmaps, page renderings, generator outputs)
//! is stored as `channels x height x width` intensities in `[0, 255]`.
//! Values stay real-valued in memory and are only quantized when written to
//! an 8-bit PNG.

use std::path::Path;

use image::{GrayImage, RgbImage};

use crate::error::{Error, Result};

/// Luma weights applied to (red, green, blue).
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![value; channels * height * width],
        }
    }

    /// Builds a 3-channel image where every pixel has the given color.
    pub fn solid_rgb(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        let mut img = Self::new(3, height, width);
        for (c, v) in rgb.iter().enumerate() {
            img.channel_mut(c).fill(*v);
        }
        img
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {channels}x{height}x{width} image",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(channels, height, width)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[self.index(c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        let i = self.index(c, y, x);
        self.data[i] = v;
    }

    pub fn pixel_rgb(&self, y: usize, x: usize) -> [f32; 3] {
        [self.get(0, y, x), self.get(1, y, x), self.get(2, y, x)]
    }

    pub fn set_rgb(&mut self, y: usize, x: usize, rgb: [f32; 3]) {
        for (c, v) in rgb.into_iter().enumerate() {
            self.set(c, y, x, v);
        }
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn same_size(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Single-channel luma. One-channel images are returned unchanged (widened).
    pub fn luma(&self) -> Vec<f64> {
        match self.channels {
            1 => self.data.iter().map(|&v| v as f64).collect(),
            3 => {
                let (r, g, b) = (self.channel(0), self.channel(1), self.channel(2));
                r.iter()
                    .zip(g)
                    .zip(b)
                    .map(|((&r, &g), &b)| {
                        LUMA_WEIGHTS[0] * r as f64
                            + LUMA_WEIGHTS[1] * g as f64
                            + LUMA_WEIGHTS[2] * b as f64
                    })
                    .collect()
            }
            c => {
                // Mean over channels for anything else.
                let n = self.height * self.width;
                (0..n)
                    .map(|i| (0..c).map(|k| self.data[k * n + i] as f64).sum::<f64>() / c as f64)
                    .collect()
            }
        }
    }

    /// Stacks the channels of `parts` in order.
    pub fn concat_channels(parts: &[&Image]) -> Result<Image> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("nothing to concatenate".into()))?;
        let mut data = Vec::new();
        let mut channels = 0;
        for p in parts {
            if !p.same_size(first) {
                return Err(Error::Shape(format!(
                    "cannot stack {}x{} with {}x{}",
                    p.height, p.width, first.height, first.width
                )));
            }
            channels += p.channels;
            data.extend_from_slice(&p.data);
        }
        Image::from_vec(channels, first.height, first.width, data)
    }

    /// Values rounded half away from zero and clamped to `[0, 255]`.
    pub fn quantize(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_value(v)).collect()
    }

    /// The same image after an 8-bit round trip.
    pub fn quantized(&self) -> Image {
        Image {
            data: self.data.iter().map(|&v| quantize_value(v) as f32).collect(),
            ..*self
        }
    }

    /// FNV-1a over the raw bit patterns; cheap identity check for wiring tests.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.data {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    /// Encodes as an 8-bit grayscale (1 channel) or RGB (3 channels) PNG.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let bytes = self.interleaved_u8();
        let mut out = Vec::new();
        let (w, h) = (self.width as u32, self.height as u32);
        let color = match self.channels {
            1 => image::ExtendedColorType::L8,
            3 => image::ExtendedColorType::Rgb8,
            c => return Err(Error::Shape(format!("cannot write a {c}-channel PNG"))),
        };
        let encoder = image::codecs::png::PngEncoder::new(&mut out);
        image::ImageEncoder::write_image(encoder, &bytes, w, h, color)?;
        Ok(out)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes = self.encode_png()?;
        crate::io::write_atomic(path.as_ref(), &bytes)
    }

    /// Loads an 8-bit PNG, keeping its channel layout (gray stays 1 channel,
    /// RGB stays 3; alpha is dropped).
    pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let dynimg = image::open(path).map_err(|e| Error::load(path, e))?;
        let color = dynimg.color();
        if color.has_color() {
            Ok(Self::from_rgb8(&dynimg.to_rgb8()))
        } else {
            Ok(Self::from_gray8(&dynimg.to_luma8()))
        }
    }

    pub fn from_gray8(img: &GrayImage) -> Image {
        let (w, h) = img.dimensions();
        Image {
            channels: 1,
            height: h as usize,
            width: w as usize,
            data: img.as_raw().iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn from_rgb8(img: &RgbImage) -> Image {
        let (w, h) = img.dimensions();
        let (w, h) = (w as usize, h as usize);
        let mut out = Image::new(3, h, w);
        for (i, px) in img.as_raw().chunks_exact(3).enumerate() {
            for c in 0..3 {
                out.data[c * w * h + i] = px[c] as f32;
            }
        }
        out
    }

    fn interleaved_u8(&self) -> Vec<u8> {
        let n = self.height * self.width;
        let mut bytes = vec![0u8; n * self.channels];
        for c in 0..self.channels {
            for i in 0..n {
                bytes[i * self.channels + c] = quantize_value(self.data[c * n + i]);
            }
        }
        bytes
    }
}

/// Round half away from zero, then clamp to the 8-bit range.
#[inline]
pub fn quantize_value(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}
