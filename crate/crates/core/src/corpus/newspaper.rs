//! Segmented and detailed renderings of newspaper layouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::atlas::GlyphAtlas;
use super::layout::{NewspaperLayout, Region, RegionKind};
use super::lexicon;
use crate::image::Image;

/// Region-label colors of segmented pages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub background: [f32; 3],
    pub text: [f32; 3],
    pub picture: [f32; 3],
}

pub const PALETTE: Palette = Palette {
    background: [255.0, 255.0, 255.0],
    text: [0.0, 0.0, 255.0],
    picture: [255.0, 0.0, 0.0],
};

impl Palette {
    pub fn colors(&self) -> [[f32; 3]; 3] {
        [self.background, self.text, self.picture]
    }

    pub fn color(&self, kind: Option<RegionKind>) -> [f32; 3] {
        match kind {
            None => self.background,
            Some(RegionKind::Text) => self.text,
            Some(RegionKind::Picture) => self.picture,
        }
    }
}

impl Default for Palette {
    fn default() -> Self {
        PALETTE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedPage(pub Image);

#[derive(Debug, Clone, PartialEq)]
pub struct DetailedPage(pub Image);

impl SegmentedPage {
    pub fn image(&self) -> &Image {
        &self.0
    }
}

impl DetailedPage {
    pub fn image(&self) -> &Image {
        &self.0
    }
}

pub fn render_segmented(layout: &NewspaperLayout) -> SegmentedPage {
    let mut img = Image::solid_rgb(layout.height, layout.width, PALETTE.background);
    for r in &layout.regions {
        let color = PALETTE.color(Some(r.kind));
        for y in r.y..r.y + r.height {
            for x in r.x..r.x + r.width {
                img.set_rgb(y, x, color);
            }
        }
    }
    SegmentedPage(img)
}

/// Ink and paper colors inside text regions of detailed pages.
const INK: [f32; 3] = [20.0, 20.0, 20.0];

pub fn render_detailed(layout: &NewspaperLayout, atlas: &GlyphAtlas, seed: u64) -> DetailedPage {
    render_detailed_with_mask(layout, atlas, seed).0
}

/// Renders a detailed page and reports which pixels received picture texture.
pub(crate) fn render_detailed_with_mask(
    layout: &NewspaperLayout,
    atlas: &GlyphAtlas,
    seed: u64,
) -> (DetailedPage, Vec<bool>) {
    let mut img = Image::solid_rgb(layout.height, layout.width, PALETTE.background);
    let mut textured = vec![false; layout.width * layout.height];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (i, region) in layout.regions.iter().enumerate() {
        match region.kind {
            RegionKind::Picture => {
                paint_texture(&mut img, region, &mut rng);
                for y in region.y..region.y + region.height {
                    for x in region.x..region.x + region.width {
                        textured[y * layout.width + x] = true;
                    }
                }
            }
            RegionKind::Text => {
                if !paint_text(&mut img, region, atlas, &mut rng) {
                    log::warn!(
                        "text region {i} ({}x{}) cannot hold one glyph row; left blank",
                        region.width,
                        region.height
                    );
                }
            }
        }
    }
    (DetailedPage(img), textured)
}

/// Number of glyph rows a text region can hold.
pub fn row_capacity(region: &Region, atlas: &GlyphAtlas) -> usize {
    if region.width < atlas.advance() {
        return 0;
    }
    region.height / atlas.glyph_height()
}

fn paint_text(img: &mut Image, region: &Region, atlas: &GlyphAtlas, rng: &mut ChaCha8Rng) -> bool {
    let rows = row_capacity(region, atlas);
    if rows == 0 {
        return false;
    }
    let (gw, gh) = (atlas.glyph_width(), atlas.glyph_height());
    let cols = region.width / gw;
    for row in 0..rows {
        let y0 = region.y + row * gh;
        let mut col = 0usize;
        loop {
            let remaining = cols.saturating_sub(col);
            let Some(word) = lexicon::sample_word_within(rng, remaining.min(7)) else {
                break;
            };
            for ch in word.chars() {
                let bm = atlas.bitmap(ch).expect("lexicon is covered by the atlas");
                let x0 = region.x + col * gw;
                for r in 0..gh {
                    for c in 0..gw {
                        if bm[r * gw + c] {
                            img.set_rgb(y0 + r, x0 + c, INK);
                        }
                    }
                }
                col += 1;
            }
            col += 1; // space
            if col >= cols {
                break;
            }
        }
    }
    true
}

/// Two-octave value noise tinted with a random base color. Values stay in
/// `[32, 224]` so textured pixels never collide with paper white or ink.
fn paint_texture(img: &mut Image, region: &Region, rng: &mut ChaCha8Rng) {
    let tint: [f32; 3] = [
        rng.random_range(0.4..1.0),
        rng.random_range(0.4..1.0),
        rng.random_range(0.4..1.0),
    ];
    let coarse = ValueNoise::new(rng, region.width, region.height, 16);
    let fine = ValueNoise::new(rng, region.width, region.height, 4);
    for dy in 0..region.height {
        for dx in 0..region.width {
            let v = 0.7 * coarse.sample(dx, dy) + 0.3 * fine.sample(dx, dy);
            let mut rgb = [0f32; 3];
            for c in 0..3 {
                rgb[c] = 32.0 + 192.0 * (v * tint[c]);
            }
            img.set_rgb(region.y + dy, region.x + dx, rgb);
        }
    }
}

struct ValueNoise {
    lattice: Vec<f32>,
    cols: usize,
    cell: usize,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, width: usize, height: usize, cell: usize) -> Self {
        let cols = width / cell + 2;
        let rows = height / cell + 2;
        let lattice = (0..cols * rows).map(|_| rng.random::<f32>()).collect();
        Self { lattice, cols, cell }
    }

    fn sample(&self, x: usize, y: usize) -> f32 {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let fx = smoothstep((x % self.cell) as f32 / self.cell as f32);
        let fy = smoothstep((y % self.cell) as f32 / self.cell as f32);
        let at = |i: usize, j: usize| self.lattice[j * self.cols + i];
        let top = at(gx, gy) * (1.0 - fx) + at(gx + 1, gy) * fx;
        let bottom = at(gx, gy + 1) * (1.0 - fx) + at(gx + 1, gy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

fn smoothstep(t: f32) -> f32 {
    t * t * (3.0 - 2.0 * t)
}
