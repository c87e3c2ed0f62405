use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ssim::{ssim, SsimConfig};
use super::text::{binarize_text, compare_histograms, histogram, recognize_glyphs, segment_words, SegmentHistogram};
use crate::corpus::{GlyphAtlas, Palette, RowGeometry};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphCounts {
    pub total: usize,
    pub invalid: usize,
}

/// Scores for a set of generated/ground-truth pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ssim_mean: f64,
    pub ssim_per_item: BTreeMap<String, f64>,
    /// Segment lengths of the generated pages (text only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<SegmentHistogram>,
    /// Same for the ground truth, kept so the modes can be compared.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_histogram: Option<SegmentHistogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyph: Option<GlyphCounts>,
}

/// One generated page and its reference.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub generated: Image,
    pub truth: Image,
}

/// Text analysis settings; `None` skips it (newspapers).
#[derive(Debug, Clone)]
pub struct TextEval {
    pub atlas: GlyphAtlas,
    pub geometry: RowGeometry,
}

impl TextEval {
    pub fn standard() -> Self {
        Self {
            atlas: GlyphAtlas::standard(),
            geometry: RowGeometry::standard(),
        }
    }
}

pub fn evaluate(pairs: &[EvalPair], ssim_config: SsimConfig, text: Option<&TextEval>) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::Shape("nothing to evaluate".into()));
    }
    let mut per_item = BTreeMap::new();
    for p in pairs {
        per_item.insert(p.id.clone(), ssim(&p.generated, &p.truth, ssim_config)?);
    }
    let ssim_mean = per_item.values().sum::<f64>() / per_item.len() as f64;
    let mut report = EvalReport {
        ssim_mean,
        ssim_per_item: per_item,
        histogram: None,
        truth_histogram: None,
        tv_distance: None,
        glyph: None,
    };
    if let Some(t) = text {
        let mut gen_lengths = Vec::new();
        let mut truth_lengths = Vec::new();
        let mut counts = GlyphCounts { total: 0, invalid: 0 };
        for p in pairs {
            gen_lengths.extend(segment_words(&binarize_text(&p.generated), &t.geometry));
            truth_lengths.extend(segment_words(&binarize_text(&p.truth), &t.geometry));
            let g = recognize_glyphs(&p.generated, &t.atlas, &t.geometry);
            counts.total += g.total_chars;
            counts.invalid += g.invalid_chars;
        }
        let (hg, ht) = (histogram(&gen_lengths), histogram(&truth_lengths));
        // An empty generated histogram has no divergence; leave it unset.
        report.tv_distance = compare_histograms(&hg, &ht).ok();
        report.histogram = Some(hg);
        report.truth_histogram = Some(ht);
        report.glyph = Some(counts);
    }
    Ok(report)
}

impl EvalReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
        serde_json::from_str(&s).map_err(|e| Error::load(path, e))
    }
}

/// Fraction of pixels within per-channel L-infinity distance `tolerance` of
/// some palette colour.
pub fn palette_adherence(image: &Image, palette: &Palette, tolerance: f32) -> f64 {
    let n = image.width() * image.height();
    if n == 0 || image.channels() != 3 {
        return 0.0;
    }
    let colors = palette.colors();
    let mut near = 0usize;
    for y in 0..image.height() {
        for x in 0..image.width() {
            let px = image.pixel_rgb(y, x);
            let hit = colors
                .iter()
                .any(|c| (0..3).all(|k| (px[k] - c[k]).abs() <= tolerance));
            near += usize::from(hit);
        }
    }
    near as f64 / n as f64
}
