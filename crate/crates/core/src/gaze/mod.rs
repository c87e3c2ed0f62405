//! Fixation records, heatmap rendering and saliency providers.

pub mod fixation;
pub mod heatmap;
pub mod saliency;
pub mod synth;

pub use fixation::{FixationRecord, TrialRecord};
pub use heatmap::{fixation_intensity, render_heatmap, Heatmap, DEFAULT_SIGMA_PX, SATURATION_PCT};
pub use saliency::{
    heuristic_saliency, load_precomputed_saliency, HeuristicSaliency, PageView, PrecomputedSaliency,
    SaliencySource,
};
