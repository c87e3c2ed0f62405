//! Saliency providers for pages without recorded gaze.
//!
//! [`HeuristicSaliency`] scores picture regions high and text lines medium,
//! then multiplies by a broad centred prior. [`PrecomputedSaliency`] reads
//! maps produced by an external model from PNG files.

use std::path::{Path, PathBuf};

use super::heatmap::Heatmap;
use crate::corpus::newspaper::{DetailedPage, SegmentedPage, PALETTE};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy)]
pub enum PageView<'a> {
    Segmented(&'a SegmentedPage),
    Detailed(&'a DetailedPage),
}

impl PageView<'_> {
    pub fn image(&self) -> &Image {
        match self {
            PageView::Segmented(p) => p.image(),
            PageView::Detailed(p) => p.image(),
        }
    }
}

pub trait SaliencySource {
    /// Heatmap for dataset item `item_id` showing `page`.
    fn heatmap_for(&self, item_id: &str, page: PageView<'_>) -> Result<Heatmap>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicSaliency {
    pub background: f64,
    pub text_floor: f64,
    pub text_line: f64,
    pub picture: f64,
    /// Period of the line modulation applied to segmented text regions.
    pub line_pitch: usize,
    pub blur_sigma: f64,
    /// Share of the centred Gaussian in the prior `(1 - w) + w * gauss`.
    pub prior_weight: f64,
    /// Prior standard deviation as a fraction of the shorter page side.
    pub prior_sigma_frac: f64,
}

impl Default for HeuristicSaliency {
    fn default() -> Self {
        Self {
            background: 0.1,
            text_floor: 0.2,
            text_line: 0.3,
            picture: 1.0,
            line_pitch: 12,
            blur_sigma: 2.0,
            prior_weight: 0.5,
            prior_sigma_frac: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Background,
    Text,
    Picture,
}

impl HeuristicSaliency {
    pub fn compute(&self, page: PageView<'_>) -> Heatmap {
        let img = page.image();
        let (h, w) = (img.height(), img.width());
        let labels: Vec<Label> = match page {
            PageView::Segmented(p) => label_segmented(p.image()),
            PageView::Detailed(p) => label_detailed(p.image()),
        };
        let line_modulated = matches!(page, PageView::Segmented(_));
        let mut base = vec![0f64; w * h];
        for y in 0..h {
            let phase = ((y % self.line_pitch) as f64 + 0.5) / self.line_pitch as f64;
            let line = (std::f64::consts::PI * phase).sin().powi(2);
            for x in 0..w {
                base[y * w + x] = match labels[y * w + x] {
                    Label::Background => self.background,
                    Label::Picture => self.picture,
                    Label::Text if line_modulated => self.text_floor + self.text_line * line,
                    // Detailed pages: the ink itself traces the lines.
                    Label::Text => self.text_floor + self.text_line,
                };
            }
        }
        let blurred = gaussian_blur(&base, w, h, self.blur_sigma);
        let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
        let s = self.prior_sigma_frac * w.min(h) as f64;
        let mut out = vec![0f64; w * h];
        for y in 0..h {
            for x in 0..w {
                let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                let prior = (1.0 - self.prior_weight) + self.prior_weight * (-r2 / (2.0 * s * s)).exp();
                out[y * w + x] = blurred[y * w + x] * prior;
            }
        }
        let peak = out.iter().copied().fold(0.0, f64::max);
        let data = out
            .iter()
            .map(|&v| if peak > 0.0 { (255.0 * v / peak) as f32 } else { 0.0 })
            .collect();
        let img = Image::from_vec(1, h, w, data).expect("sized above");
        Heatmap::from_image(img, self.blur_sigma).expect("normalized into range")
    }
}

impl SaliencySource for HeuristicSaliency {
    fn heatmap_for(&self, _item_id: &str, page: PageView<'_>) -> Result<Heatmap> {
        Ok(self.compute(page))
    }
}

/// The default heuristic applied to `page`.
pub fn heuristic_saliency(page: PageView<'_>) -> Heatmap {
    HeuristicSaliency::default().compute(page)
}

fn label_segmented(img: &Image) -> Vec<Label> {
    let n = img.height() * img.width();
    (0..n)
        .map(|i| {
            let px = [img.channel(0)[i], img.channel(1)[i], img.channel(2)[i]];
            let dist = |c: [f32; 3]| {
                c.iter()
                    .zip(px)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0f32, f32::max)
            };
            let candidates = [
                (dist(PALETTE.background), Label::Background),
                (dist(PALETTE.text), Label::Text),
                (dist(PALETTE.picture), Label::Picture),
            ];
            candidates
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, l)| l)
                .unwrap()
        })
        .collect()
}

fn label_detailed(img: &Image) -> Vec<Label> {
    let n = img.height() * img.width();
    let luma = img.luma();
    (0..n)
        .map(|i| {
            let lo = (0..img.channels().min(3))
                .map(|c| img.channel(c)[i])
                .fold(f32::INFINITY, f32::min);
            if lo > 247.0 {
                Label::Background
            } else if luma[i] < 28.0 {
                Label::Text
            } else {
                Label::Picture
            }
        })
        .collect()
}

/// Separable Gaussian blur with edge clamping.
fn gaussian_blur(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let xx = clamp(x as isize + k as isize - radius, w);
                acc += kv * src[y * w + xx];
            }
            tmp[y * w + x] = acc / norm;
        }
    }
    let mut out = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let yy = clamp(y as isize + k as isize - radius, h);
                acc += kv * tmp[yy * w + x];
            }
            out[y * w + x] = acc / norm;
        }
    }
    out
}

/// Reads `<dir>/<item_id>.png` maps produced elsewhere.
#[derive(Debug, Clone)]
pub struct PrecomputedSaliency {
    pub dir: PathBuf,
}

impl SaliencySource for PrecomputedSaliency {
    fn heatmap_for(&self, item_id: &str, page: PageView<'_>) -> Result<Heatmap> {
        let img = page.image();
        load_precomputed_saliency(&self.dir.join(format!("{item_id}.png")), img.width(), img.height())
    }
}

/// Loads an 8-bit grayscale map, widening values unchanged.
pub fn load_precomputed_saliency(path: &Path, width: usize, height: usize) -> Result<Heatmap> {
    if !path.exists() {
        return Err(Error::load(path, "file not found"));
    }
    let dynimg = image::open(path).map_err(|e| Error::load(path, e))?;
    if dynimg.color().has_color() {
        return Err(Error::load(path, "saliency maps must be grayscale"));
    }
    let img = Image::from_gray8(&dynimg.to_luma8());
    if img.width() != width || img.height() != height {
        return Err(Error::load(
            path,
            format!(
                "size mismatch: file is {}x{}, page is {width}x{height}",
                img.width(),
                img.height()
            ),
        ));
    }
    Heatmap::from_image(img, 0.0)
}
