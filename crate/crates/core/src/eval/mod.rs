//! Reconstruction metrics: SSIM, word-segment histograms and glyph
//! recognition.

pub mod report;
pub mod ssim;
pub mod text;

pub use report::{evaluate, palette_adherence, EvalPair, EvalReport, GlyphCounts, TextEval};
pub use ssim::{ssim, ssim_map, SsimConfig};
pub use text::{
    binarize_text, compare_histograms, histogram, recognize_glyphs, segment_spans, segment_words, GlyphReport,
    Segment, SegmentHistogram, TextMask,
};
