//! Synthetic newspaper and text-page corpora, plus the on-disk dataset layout.

pub mod atlas;
pub mod dataset;
pub mod layout;
pub mod lexicon;
pub mod newspaper;
pub mod text_page;

pub use atlas::{AtlasMetrics, GlyphAtlas};
pub use dataset::{Dataset, DatasetItem, DatasetKind, Manifest};
pub use layout::{sample_newspaper_layout, LayoutConstraints, NewspaperLayout, Region, RegionKind};
pub use newspaper::{render_detailed, render_segmented, DetailedPage, Palette, SegmentedPage, PALETTE};
pub use text_page::{
    layout_words, render_text_page, to_display, RowBand, RowGeometry, TextPageImage, TextPageSpec,
    WordBox,
};
