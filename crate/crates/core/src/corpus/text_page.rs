//! Encoded text pages: 15 words in 3 rows of 5.
//!
//! Channel layout of an encoded page:
//!
//! * red: constant background (default 255),
//! * green: glyph ink (255) or nothing (0),
//! * blue: zero everywhere.

use serde::{Deserialize, Serialize};

use super::atlas::{AtlasMetrics, GlyphAtlas};
use crate::error::{Error, Result};
use crate::image::Image;

pub const WORDS_PER_PAGE: usize = 15;
pub const ROWS: usize = 3;
pub const WORDS_PER_ROW: usize = 5;
pub const PAGE_SIDE: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextPageSpec {
    pub words: Vec<String>,
    pub page_width: usize,
    pub page_height: usize,
    pub rows: usize,
    pub words_per_row: usize,
    pub background_red: f32,
    /// Blank columns before the first word of every row.
    pub left_margin: usize,
}

impl TextPageSpec {
    pub fn new<S: AsRef<str>>(words: &[S]) -> Self {
        Self {
            words: words.iter().map(|w| w.as_ref().to_string()).collect(),
            page_width: PAGE_SIDE,
            page_height: PAGE_SIDE,
            rows: ROWS,
            words_per_row: WORDS_PER_ROW,
            background_red: 255.0,
            left_margin: 8,
        }
    }

    pub fn row_geometry(&self, metrics: AtlasMetrics) -> RowGeometry {
        RowGeometry::new(self.page_height, self.rows, metrics, self.left_margin)
    }
}

/// Vertical placement of text rows on a page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowGeometry {
    pub bands: Vec<RowBand>,
    pub glyph_width: usize,
    pub glyph_height: usize,
    pub left_margin: usize,
}

/// One horizontal band `[top, bottom)` with its glyph row starting at `glyph_top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowBand {
    pub top: usize,
    pub bottom: usize,
    pub glyph_top: usize,
}

impl RowGeometry {
    /// Splits the page height into `rows` equal bands and centres one glyph
    /// row in each.
    pub fn new(page_height: usize, rows: usize, metrics: AtlasMetrics, left_margin: usize) -> Self {
        let bands = (0..rows)
            .map(|r| {
                let top = r * page_height / rows;
                let bottom = (r + 1) * page_height / rows;
                let slack = (bottom - top).saturating_sub(metrics.glyph_height_px);
                RowBand {
                    top,
                    bottom,
                    glyph_top: top + slack / 2,
                }
            })
            .collect();
        Self {
            bands,
            glyph_width: metrics.glyph_width_px,
            glyph_height: metrics.glyph_height_px,
            left_margin,
        }
    }

    /// Geometry of the standard 256x256 page with the standard atlas.
    pub fn standard() -> Self {
        TextPageSpec::new(&[""; WORDS_PER_PAGE]).row_geometry(AtlasMetrics::default())
    }
}

/// Where one word landed on the page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBox {
    pub index: usize,
    pub row: usize,
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextPageImage(Image);

impl TextPageImage {
    pub fn image(&self) -> &Image {
        &self.0
    }

    pub fn into_image(self) -> Image {
        self.0
    }

    /// Wraps an image after checking the encoded-page channel discipline.
    pub fn from_image(image: Image) -> Result<Self> {
        if image.channels() != 3 {
            return Err(Error::Shape(format!(
                "text pages have 3 channels, got {}",
                image.channels()
            )));
        }
        if image.channel(2).iter().any(|&b| b != 0.0) {
            return Err(Error::Shape("text page blue channel must be zero".into()));
        }
        let red = image.channel(0);
        if red.iter().any(|&r| r != red[0]) {
            return Err(Error::Shape("text page red channel must be constant".into()));
        }
        Ok(Self(image))
    }

    /// Pixels carrying glyph ink.
    pub fn glyph_mask(&self) -> Vec<bool> {
        self.0.channel(1).iter().map(|&g| g != 0.0).collect()
    }
}

/// Computes word placements without rendering.
pub fn layout_words(spec: &TextPageSpec, atlas: &GlyphAtlas) -> Result<Vec<WordBox>> {
    let expected = spec.rows * spec.words_per_row;
    if spec.words.len() != expected {
        return Err(Error::Layout(format!(
            "a page holds exactly {expected} words, got {}",
            spec.words.len()
        )));
    }
    let geometry = spec.row_geometry(atlas.metrics());
    if geometry.bands.iter().any(|b| b.bottom - b.top < atlas.glyph_height()) {
        return Err(Error::Layout("rows are shorter than one glyph".into()));
    }
    let advance = atlas.advance();
    let mut boxes = Vec::with_capacity(expected);
    for (row, band) in geometry.bands.iter().enumerate() {
        let mut x = spec.left_margin;
        for k in 0..spec.words_per_row {
            let index = row * spec.words_per_row + k;
            let text = &spec.words[index];
            for ch in text.chars() {
                atlas.bitmap(ch)?;
            }
            let width = atlas.text_width(text);
            if x + width > spec.page_width {
                return Err(Error::Layout(format!(
                    "word {index} ({text:?}) overflows row {row}: ends at {} > {}",
                    x + width,
                    spec.page_width
                )));
            }
            boxes.push(WordBox {
                index,
                row,
                x,
                y: band.glyph_top,
                width,
                height: atlas.glyph_height(),
                text: text.clone(),
            });
            x += width + advance;
        }
    }
    Ok(boxes)
}

pub fn render_text_page(spec: &TextPageSpec, atlas: &GlyphAtlas) -> Result<TextPageImage> {
    let boxes = layout_words(spec, atlas)?;
    let mut img = Image::new(3, spec.page_height, spec.page_width);
    img.channel_mut(0).fill(spec.background_red);
    let (gw, gh) = (atlas.glyph_width(), atlas.glyph_height());
    for wb in &boxes {
        for (k, ch) in wb.text.chars().enumerate() {
            let bm = atlas.bitmap(ch)?;
            let x0 = wb.x + k * gw;
            for r in 0..gh {
                for c in 0..gw {
                    if bm[r * gw + c] {
                        img.set(1, wb.y + r, x0 + c, 255.0);
                    }
                }
            }
        }
    }
    Ok(TextPageImage(img))
}

/// Display form: black glyphs on white, single channel.
pub fn to_display(page: &TextPageImage) -> Image {
    let src = page.image();
    let data = src
        .channel(1)
        .iter()
        .map(|&g| if g > 127.0 { 0.0 } else { 255.0 })
        .collect();
    Image::from_vec(1, src.height(), src.width(), data).expect("same size")
}

/// Samples `count` lexicon words that fit together, space separated, in a
/// row of `row_width` pixels.
pub fn fill_row_words<R: rand::Rng + ?Sized>(
    rng: &mut R,
    atlas: &GlyphAtlas,
    row_width: usize,
    count: usize,
) -> Vec<String> {
    let advance = atlas.advance();
    // Row capacity in characters, including one space between words.
    let capacity = row_width / advance;
    let mut words: Vec<String> = Vec::with_capacity(count);
    let mut used = 0usize;
    for k in 0..count {
        let remaining_words = count - k - 1;
        // Leave at least one letter plus a space for every word still to come.
        let reserve = remaining_words * 2;
        let spaces = usize::from(k > 0);
        let budget = capacity.saturating_sub(used + spaces + reserve);
        let w = super::lexicon::sample_word_within(rng, budget.min(7)).unwrap_or("a");
        used += spaces + w.len();
        words.push(w.to_string());
    }
    words
}
