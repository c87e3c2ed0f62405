//! Fixation heatmaps.
//!
//! A fixation is drawn as a Gaussian blob whose peak brightness is linear in
//! its share of trial time, saturating at [`SATURATION_PCT`] percent. Blobs
//! are composed by per-pixel maximum, so overlapping fixations never exceed
//! 255 and the brightest fixation sets the heatmap peak exactly.

use std::path::Path;

use super::fixation::TrialRecord;
use crate::error::{Error, Result};
use crate::image::Image;

/// Duration share (percent) mapped to full brightness.
pub const SATURATION_PCT: f64 = 0.17;
pub const MAX_INTENSITY: f64 = 255.0;
pub const DEFAULT_SIGMA_PX: f64 = 2.0;

/// Brightness of a fixation holding `duration_pct` percent of trial time.
pub fn fixation_intensity(duration_pct: f64) -> Result<f64> {
    if duration_pct.is_nan() || duration_pct < 0.0 {
        return Err(Error::Domain(duration_pct));
    }
    Ok(MAX_INTENSITY * (duration_pct.min(SATURATION_PCT) / SATURATION_PCT))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    image: Image,
    pub kernel_sigma_px: f64,
}

impl Heatmap {
    pub fn zeros(width: usize, height: usize, sigma: f64) -> Self {
        Self {
            image: Image::new(1, height, width),
            kernel_sigma_px: sigma,
        }
    }

    /// Wraps a one-channel image whose values already lie in `[0, 255]`.
    pub fn from_image(image: Image, sigma: f64) -> Result<Self> {
        if image.channels() != 1 {
            return Err(Error::Shape(format!(
                "heatmaps have one channel, got {}",
                image.channels()
            )));
        }
        if image.data().iter().any(|v| !(0.0..=255.0).contains(v)) {
            return Err(Error::Shape("heatmap values must lie in [0, 255]".into()));
        }
        Ok(Self {
            image,
            kernel_sigma_px: sigma,
        })
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn into_image(self) -> Image {
        self.image
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.image.get(0, y, x)
    }

    pub fn values(&self) -> &[f32] {
        self.image.data()
    }

    pub fn peak(&self) -> f32 {
        self.image.max_value()
    }

    /// Writes an 8-bit grayscale PNG (round half away from zero).
    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.image.save_png(path)
    }
}

/// Draws every fixation of `trial` onto a `width x height` page.
pub fn render_heatmap(trial: &TrialRecord, width: usize, height: usize, sigma: f64) -> Result<Heatmap> {
    for (index, f) in trial.fixations.iter().enumerate() {
        let inside = f.x_px >= 0.0 && f.y_px >= 0.0 && f.x_px < width as f64 && f.y_px < height as f64;
        if !inside {
            return Err(Error::FixationOutOfBounds {
                index,
                x: f.x_px,
                y: f.y_px,
                width,
                height,
            });
        }
    }
    let mut map = Heatmap::zeros(width, height, sigma);
    let peaks = trial
        .effective_percentages()
        .into_iter()
        .map(fixation_intensity)
        .collect::<Result<Vec<_>>>()?;
    for (f, peak) in trial.fixations.iter().zip(peaks) {
        stamp_blob(&mut map.image, f.x_px, f.y_px, peak, sigma);
    }
    Ok(map)
}

fn stamp_blob(img: &mut Image, cx: f64, cy: f64, peak: f64, sigma: f64) {
    if peak <= 0.0 {
        return;
    }
    let (w, h) = (img.width() as isize, img.height() as isize);
    if sigma <= 0.0 {
        let (x, y) = (cx.round() as isize, cy.round() as isize);
        if x < w && y < h {
            let v = img.get(0, y as usize, x as usize).max(peak as f32);
            img.set(0, y as usize, x as usize, v);
        }
        return;
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let (px, py) = (cx.round() as isize, cy.round() as isize);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for y in (py - radius).max(0)..=(py + radius).min(h - 1) {
        for x in (px - radius).max(0)..=(px + radius).min(w - 1) {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let v = (peak * (-(dx * dx + dy * dy) * inv).exp()) as f32;
            let cur = img.get(0, y as usize, x as usize);
            if v > cur {
                img.set(0, y as usize, x as usize, v);
            }
        }
    }
}
