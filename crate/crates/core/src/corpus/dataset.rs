//! On-disk dataset layout.
//!
//! ```text
//! dataset/
//!   manifest.json
//!   heat/NNNN.png        8-bit grayscale heatmaps
//!   seg/NNNN.png         segmented newspaper pages
//!   detail/NNNN.png      detailed newspaper pages
//!   text/NNNN.png        encoded text pages
//!   fixations/NNNN.json  {page_id, fixations: [{x, y, word_index?, duration_pct}]}
//!   words/NNNN.json      word list of a text page
//! ```
//!
//! Externally produced datasets in the same layout load the same way; any
//! image directory may be missing for kinds that do not use it.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::atlas::{AtlasMetrics, GlyphAtlas};
use super::layout::{sample_newspaper_layout, LayoutConstraints};
use super::newspaper::{render_detailed, render_segmented, DetailedPage, Palette, PALETTE};
use super::text_page::{self, layout_words, render_text_page, TextPageSpec};
use crate::error::{Error, Result};
use crate::gaze::saliency::{HeuristicSaliency, PageView, PrecomputedSaliency, SaliencySource};
use crate::gaze::{render_heatmap, synth, Heatmap, TrialRecord};
use crate::image::Image;
use crate::io;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Newspaper,
    Text,
}

impl std::fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DatasetKind::Newspaper => "newspaper",
            DatasetKind::Text => "text",
        })
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newspaper" => Ok(DatasetKind::Newspaper),
            "text" => Ok(DatasetKind::Text),
            other => Err(Error::Config(format!("unknown dataset kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSize {
    pub width: usize,
    pub height: usize,
}

/// Where a dataset's heatmaps came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatProvider {
    /// Rendered from the fixation JSON files.
    Fixations,
    /// [`HeuristicSaliency`] on the detailed page.
    Heuristic,
    /// PNG maps supplied from elsewhere.
    Precomputed,
}

impl std::str::FromStr for HeatProvider {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixations" => Ok(HeatProvider::Fixations),
            "heuristic" => Ok(HeatProvider::Heuristic),
            "precomputed" => Ok(HeatProvider::Precomputed),
            other => Err(Error::Config(format!("unknown heat provider {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatRender {
    pub provider: HeatProvider,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: DatasetKind,
    pub item_ids: Vec<String>,
    pub page_size: PageSize,
    pub palette: Palette,
    pub atlas_metrics: AtlasMetrics,
    pub generator_seed: u64,
    /// Set once heatmaps have been rendered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatRender>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let m: Manifest = io::read_json(&dir.join("manifest.json"))?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::load(
                dir.join("manifest.json"),
                format!("format_version {} is not {FORMAT_VERSION}", m.format_version),
            ));
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        io::write_json(&dir.join("manifest.json"), self)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetItem {
    pub id: String,
    pub heat: Option<Heatmap>,
    pub seg: Option<Image>,
    pub detail: Option<Image>,
    pub text: Option<Image>,
    pub trial: Option<TrialRecord>,
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: Manifest,
    pub items: Vec<DatasetItem>,
}

/// Options for synthetic corpus generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    /// Side of the square newspaper page; text pages are always 256.
    pub newspaper_side: usize,
    /// Render heatmaps immediately (fixations for text, heuristic for newspapers).
    pub with_heat: bool,
    pub sigma: f64,
    /// Positional fixations recorded per newspaper page.
    pub newspaper_fixations: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            newspaper_side: 256,
            with_heat: false,
            sigma: crate::gaze::DEFAULT_SIGMA_PX,
            newspaper_fixations: 16,
        }
    }
}

pub fn item_id(index: usize) -> String {
    format!("{index:04}")
}

/// Seed of item `index` in a corpus generated from `seed` (splitmix64).
pub fn item_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Dataset {
    /// Generates `n` synthetic items; a pure function of its arguments.
    pub fn synthesize(kind: DatasetKind, n: usize, seed: u64, options: SynthOptions) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("a dataset needs at least one item".into()));
        }
        let atlas = GlyphAtlas::standard();
        let side = match kind {
            DatasetKind::Text => text_page::PAGE_SIDE,
            DatasetKind::Newspaper => options.newspaper_side,
        };
        let mut items = Vec::with_capacity(n);
        for index in 0..n {
            let s = item_seed(seed, index);
            let id = item_id(index);
            let item = match kind {
                DatasetKind::Text => synth_text_item(&id, s, &atlas, options)?,
                DatasetKind::Newspaper => synth_newspaper_item(&id, s, side, &atlas, options)?,
            };
            items.push(item);
        }
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            kind,
            item_ids: items.iter().map(|i| i.id.clone()).collect(),
            page_size: PageSize {
                width: side,
                height: side,
            },
            palette: PALETTE,
            atlas_metrics: atlas.metrics(),
            generator_seed: seed,
            heat: options.with_heat.then_some(HeatRender {
                provider: match kind {
                    DatasetKind::Text => HeatProvider::Fixations,
                    DatasetKind::Newspaper => HeatProvider::Heuristic,
                },
                sigma: options.sigma,
            }),
        };
        Ok(Self { manifest, items })
    }

    pub fn kind(&self) -> DatasetKind {
        self.manifest.kind
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, id: &str) -> Option<&DatasetItem> {
        self.items.iter().find(|i| i.id == id)
    }

    /// Keeps only the items whose ids are listed, in that order.
    pub fn subset(&self, ids: &[String]) -> Result<Dataset> {
        let items = ids
            .iter()
            .map(|id| {
                self.item(id)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("no item {id:?} in dataset")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut manifest = self.manifest.clone();
        manifest.item_ids = ids.to_vec();
        Ok(Dataset { manifest, items })
    }

    /// Writes every present component plus the manifest.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for item in &self.items {
            let id = &item.id;
            if let Some(h) = &item.heat {
                h.save_png(&dir.join("heat").join(format!("{id}.png")))?;
            }
            for (sub, img) in [("seg", &item.seg), ("detail", &item.detail), ("text", &item.text)] {
                if let Some(img) = img {
                    img.save_png(dir.join(sub).join(format!("{id}.png")))?;
                }
            }
            if let Some(t) = &item.trial {
                t.save(&dir.join("fixations").join(format!("{id}.json")))?;
            }
            if let Some(w) = &item.words {
                io::write_json(&dir.join("words").join(format!("{id}.json")), w)?;
            }
        }
        self.manifest.save(dir)
    }

    /// Loads a dataset directory. Heatmaps are rebuilt at full precision
    /// from their source when the manifest says how they were made, and
    /// widened from the 8-bit PNGs otherwise.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = Manifest::load(dir)?;
        let mut items = Vec::with_capacity(manifest.item_ids.len());
        let optional_png = |sub: &str, id: &str| -> Result<Option<Image>> {
            let p = dir.join(sub).join(format!("{id}.png"));
            if p.exists() {
                Image::load_png(&p).map(Some)
            } else {
                Ok(None)
            }
        };
        for id in &manifest.item_ids {
            let fix_path = dir.join("fixations").join(format!("{id}.json"));
            let trial = if fix_path.exists() {
                Some(TrialRecord::load(&fix_path)?)
            } else {
                None
            };
            let words_path = dir.join("words").join(format!("{id}.json"));
            let words = if words_path.exists() {
                Some(io::read_json(&words_path)?)
            } else {
                None
            };
            let mut item = DatasetItem {
                id: id.clone(),
                heat: None,
                seg: optional_png("seg", id)?,
                detail: optional_png("detail", id)?,
                text: optional_png("text", id)?,
                trial,
                words,
            };
            item.heat = load_heat(dir, &manifest, &item)?;
            items.push(item);
        }
        Ok(Self { manifest, items })
    }

    /// Renders heatmaps for every item with `provider`, returning the ids
    /// that failed alongside their errors; successful items are updated.
    pub fn render_heat(&mut self, provider: HeatProvider, sigma: f64, precomputed_dir: Option<&Path>) -> Vec<(String, Error)> {
        let PageSize { width, height } = self.manifest.page_size;
        let mut failures = Vec::new();
        for item in &mut self.items {
            let result = heat_for_item(item, provider, sigma, width, height, precomputed_dir);
            match result {
                Ok(h) => item.heat = Some(h),
                Err(e) => failures.push((item.id.clone(), e)),
            }
        }
        self.manifest.heat = Some(HeatRender { provider, sigma });
        failures
    }
}

fn heat_for_item(
    item: &DatasetItem,
    provider: HeatProvider,
    sigma: f64,
    width: usize,
    height: usize,
    precomputed_dir: Option<&Path>,
) -> Result<Heatmap> {
    match provider {
        HeatProvider::Fixations => {
            let trial = item
                .trial
                .as_ref()
                .ok_or_else(|| Error::Config(format!("item {} has no fixation file", item.id)))?;
            render_heatmap(trial, width, height, sigma)
        }
        HeatProvider::Heuristic => {
            let page = detailed_or_segmented(item)?;
            HeuristicSaliency::default().heatmap_for(&item.id, page.view())
        }
        HeatProvider::Precomputed => {
            let dir = precomputed_dir
                .ok_or_else(|| Error::Config("precomputed provider needs a directory".into()))?;
            let page = detailed_or_segmented(item)?;
            PrecomputedSaliency { dir: dir.to_path_buf() }.heatmap_for(&item.id, page.view())
        }
    }
}

enum OwnedPage {
    Detailed(DetailedPage),
    Segmented(super::newspaper::SegmentedPage),
}

impl OwnedPage {
    fn view(&self) -> PageView<'_> {
        match self {
            OwnedPage::Detailed(p) => PageView::Detailed(p),
            OwnedPage::Segmented(p) => PageView::Segmented(p),
        }
    }
}

fn detailed_or_segmented(item: &DatasetItem) -> Result<OwnedPage> {
    if let Some(d) = &item.detail {
        Ok(OwnedPage::Detailed(DetailedPage(d.clone())))
    } else if let Some(s) = &item.seg {
        Ok(OwnedPage::Segmented(super::newspaper::SegmentedPage(s.clone())))
    } else {
        Err(Error::Config(format!("item {} has no newspaper page", item.id)))
    }
}

fn load_heat(dir: &Path, manifest: &Manifest, item: &DatasetItem) -> Result<Option<Heatmap>> {
    let png = dir.join("heat").join(format!("{}.png", item.id));
    let PageSize { width, height } = manifest.page_size;
    let regenerated = match manifest.heat {
        Some(HeatRender {
            provider: HeatProvider::Fixations,
            sigma,
        }) if item.trial.is_some() => Some(heat_for_item(item, HeatProvider::Fixations, sigma, width, height, None)?),
        Some(HeatRender {
            provider: HeatProvider::Heuristic,
            sigma,
        }) if item.detail.is_some() || item.seg.is_some() => {
            Some(heat_for_item(item, HeatProvider::Heuristic, sigma, width, height, None)?)
        }
        _ => None,
    };
    if regenerated.is_some() {
        return Ok(regenerated);
    }
    if png.exists() {
        let img = Image::load_png(&png)?;
        return Heatmap::from_image(img, 0.0).map(Some);
    }
    Ok(None)
}

fn synth_text_item(id: &str, seed: u64, atlas: &GlyphAtlas, options: SynthOptions) -> Result<DatasetItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = TextPageSpec::new(&[""; text_page::WORDS_PER_PAGE]);
    let row_width = probe.page_width - probe.left_margin;
    let mut words = Vec::with_capacity(text_page::WORDS_PER_PAGE);
    for _ in 0..probe.rows {
        words.extend(text_page::fill_row_words(&mut rng, atlas, row_width, probe.words_per_row));
    }
    let spec = TextPageSpec::new(&words);
    let page = render_text_page(&spec, atlas)?;
    let boxes = layout_words(&spec, atlas)?;
    let trial = synth::reading_trial(id, &boxes, seed.rotate_left(17));
    let heat = if options.with_heat {
        Some(render_heatmap(&trial, spec.page_width, spec.page_height, options.sigma)?)
    } else {
        None
    };
    Ok(DatasetItem {
        id: id.to_string(),
        heat,
        text: Some(page.into_image()),
        trial: Some(trial),
        words: Some(words),
        ..Default::default()
    })
}

fn synth_newspaper_item(
    id: &str,
    seed: u64,
    side: usize,
    atlas: &GlyphAtlas,
    options: SynthOptions,
) -> Result<DatasetItem> {
    let layout = sample_newspaper_layout(seed, &LayoutConstraints::for_page(side))?;
    let seg = render_segmented(&layout);
    let detail = render_detailed(&layout, atlas, seed.rotate_left(7));
    let saliency = HeuristicSaliency::default().compute(PageView::Detailed(&detail));
    let trial = synth::fixations_from_saliency(id, &saliency, options.newspaper_fixations, seed.rotate_left(23));
    Ok(DatasetItem {
        id: id.to_string(),
        heat: options.with_heat.then_some(saliency),
        seg: Some(seg.0),
        detail: Some(detail.0),
        trial: Some(trial),
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesis_is_deterministic() {
        let opts = SynthOptions {
            newspaper_side: 64,
            with_heat: true,
            ..Default::default()
        };
        for kind in [DatasetKind::Text, DatasetKind::Newspaper] {
            let a = Dataset::synthesize(kind, 3, 42, opts).unwrap();
            let b = Dataset::synthesize(kind, 3, 42, opts).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.manifest.item_ids, vec!["0000", "0001", "0002"]);
        }
        assert!(Dataset::synthesize(DatasetKind::Text, 0, 1, opts).is_err());
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let opts = SynthOptions {
            newspaper_side: 64,
            with_heat: true,
            ..Default::default()
        };
        let ds = Dataset::synthesize(DatasetKind::Newspaper, 2, 5, opts).unwrap();
        ds.write(dir.path()).unwrap();
        let back = Dataset::load(dir.path()).unwrap();
        assert_eq!(back.manifest, ds.manifest);
        for (a, b) in ds.items.iter().zip(&back.items) {
            assert_eq!(a.seg, b.seg);
            assert_eq!(a.trial, b.trial);
            // Regenerated from the page, so full precision survives.
            assert_eq!(a.heat, b.heat);
        }
    }

    #[test]
    fn text_items_carry_fitting_words() {
        let ds = Dataset::synthesize(DatasetKind::Text, 4, 9, SynthOptions::default()).unwrap();
        for item in &ds.items {
            let words = item.words.as_ref().unwrap();
            assert_eq!(words.len(), 15);
            let page = crate::corpus::text_page::TextPageImage::from_image(item.text.clone().unwrap());
            assert!(page.is_ok());
        }
    }
}
