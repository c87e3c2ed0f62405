//! Monospace glyph atlas.
//!
//! The built-in face is a 5x8 pixel design, emboldened to 6 columns and
//! centred in an 8x12 cell. Every glyph also carries a full-width baseline
//! rule two rows under the body, so the ink of a word spans exactly its
//! advance width and word segments can be measured by counting columns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasMetrics {
    pub glyph_width_px: usize,
    pub glyph_height_px: usize,
}

impl Default for AtlasMetrics {
    fn default() -> Self {
        Self {
            glyph_width_px: 8,
            glyph_height_px: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphAtlas {
    metrics: AtlasMetrics,
    bitmaps: BTreeMap<char, Vec<bool>>,
}

const BODY_TOP: usize = 1;
const RULE_ROW: usize = 10;

impl GlyphAtlas {
    /// The built-in 8x12 face covering `a-z`, `A-Z` and space.
    pub fn standard() -> Self {
        let metrics = AtlasMetrics::default();
        let (w, h) = (metrics.glyph_width_px, metrics.glyph_height_px);
        let mut bitmaps = BTreeMap::new();
        bitmaps.insert(' ', vec![false; w * h]);
        for (ch, rows) in FACE {
            let mut cell = vec![false; w * h];
            for (r, row) in rows.iter().enumerate() {
                for (c, px) in row.bytes().enumerate() {
                    if px == b'#' {
                        // Embolden: each design pixel covers two columns.
                        cell[(BODY_TOP + r) * w + c + 1] = true;
                        cell[(BODY_TOP + r) * w + c + 2] = true;
                    }
                }
            }
            for c in 0..w {
                cell[RULE_ROW * w + c] = true;
            }
            bitmaps.insert(*ch, cell);
        }
        Self { metrics, bitmaps }
    }

    /// Builds an atlas from externally supplied bitmaps, checking the
    /// cell-size and blank-space invariants.
    pub fn from_bitmaps(metrics: AtlasMetrics, bitmaps: BTreeMap<char, Vec<bool>>) -> Result<Self> {
        let cell = metrics.glyph_width_px * metrics.glyph_height_px;
        if cell == 0 {
            return Err(Error::Config("glyph cells must be nonempty".into()));
        }
        for (ch, bm) in &bitmaps {
            if bm.len() != cell {
                return Err(Error::Config(format!(
                    "bitmap for {ch:?} has {} cells, expected {cell}",
                    bm.len()
                )));
            }
        }
        match bitmaps.get(&' ') {
            Some(bm) if bm.iter().all(|&b| !b) => {}
            Some(_) => return Err(Error::Config("space glyph must be blank".into())),
            None => return Err(Error::Config("atlas must contain a space glyph".into())),
        }
        Ok(Self { metrics, bitmaps })
    }

    pub fn metrics(&self) -> AtlasMetrics {
        self.metrics
    }

    pub fn glyph_width(&self) -> usize {
        self.metrics.glyph_width_px
    }

    pub fn glyph_height(&self) -> usize {
        self.metrics.glyph_height_px
    }

    /// Horizontal advance; the atlas is monospace so this is the cell width.
    pub fn advance(&self) -> usize {
        self.metrics.glyph_width_px
    }

    pub fn cell_area(&self) -> usize {
        self.metrics.glyph_width_px * self.metrics.glyph_height_px
    }

    pub fn bitmap(&self, ch: char) -> Result<&[bool]> {
        self.bitmaps
            .get(&ch)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownGlyph(ch))
    }

    pub fn contains(&self, ch: char) -> bool {
        self.bitmaps.contains_key(&ch)
    }

    /// All glyphs except space, in code-point order.
    pub fn glyphs(&self) -> impl Iterator<Item = (char, &[bool])> {
        self.bitmaps
            .iter()
            .filter(|(c, _)| **c != ' ')
            .map(|(c, b)| (*c, b.as_slice()))
    }

    /// Width in pixels of `text` set in this face.
    pub fn text_width(&self, text: &str) -> usize {
        text.chars().count() * self.advance()
    }
}

impl Default for GlyphAtlas {
    fn default() -> Self {
        Self::standard()
    }
}

#[rustfmt::skip]
const FACE: &[(char, [&str; 8])] = &[
    ('A', [".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#", "....."]),
    ('B', ["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####.", "....."]),
    ('C', [".###.", "#...#", "#....", "#....", "#....", "#...#", ".###.", "....."]),
    ('D', ["####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####.", "....."]),
    ('E', ["#####", "#....", "#....", "####.", "#....", "#....", "#####", "....."]),
    ('F', ["#####", "#....", "#....", "####.", "#....", "#....", "#....", "....."]),
    ('G', [".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####", "....."]),
    ('H', ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#", "....."]),
    ('I', [".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", "....."]),
    ('J', ["..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##..", "....."]),
    ('K', ["#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#", "....."]),
    ('L', ["#....", "#....", "#....", "#....", "#....", "#....", "#####", "....."]),
    ('M', ["#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#", "....."]),
    ('N', ["#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "....."]),
    ('O', [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.", "....."]),
    ('P', ["####.", "#...#", "#...#", "####.", "#....", "#....", "#....", "....."]),
    ('Q', [".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#", "....."]),
    ('R', ["####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#", "....."]),
    ('S', [".####", "#....", "#....", ".###.", "....#", "....#", "####.", "....."]),
    ('T', ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#..", "....."]),
    ('U', ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.", "....."]),
    ('V', ["#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#..", "....."]),
    ('W', ["#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#.", "....."]),
    ('X', ["#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#", "....."]),
    ('Y', ["#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#..", "....."]),
    ('Z', ["#####", "....#", "...#.", "..#..", ".#...", "#....", "#####", "....."]),
    ('a', [".....", ".....", ".###.", "....#", ".####", "#...#", ".####", "....."]),
    ('b', ["#....", "#....", "#.##.", "##..#", "#...#", "#...#", "####.", "....."]),
    ('c', [".....", ".....", ".###.", "#....", "#....", "#...#", ".###.", "....."]),
    ('d', ["....#", "....#", ".##.#", "#..##", "#...#", "#...#", ".####", "....."]),
    ('e', [".....", ".....", ".###.", "#...#", "#####", "#....", ".###.", "....."]),
    ('f', ["..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#...", "....."]),
    ('g', [".....", ".....", ".####", "#...#", "#...#", ".####", "....#", ".###."]),
    ('h', ["#....", "#....", "#.##.", "##..#", "#...#", "#...#", "#...#", "....."]),
    ('i', ["..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.", "....."]),
    ('j', ["...#.", ".....", "..##.", "...#.", "...#.", "#..#.", ".##..", "....."]),
    ('k', ["#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "....."]),
    ('l', [".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", "....."]),
    ('m', [".....", ".....", "##.#.", "#.#.#", "#.#.#", "#...#", "#...#", "....."]),
    ('n', [".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#", "....."]),
    ('o', [".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.", "....."]),
    ('p', [".....", ".....", "####.", "#...#", "#...#", "####.", "#....", "#...."]),
    ('q', [".....", ".....", ".##.#", "#..##", "#...#", ".####", "....#", "....#"]),
    ('r', [".....", ".....", "#.##.", "##..#", "#....", "#....", "#....", "....."]),
    ('s', [".....", ".....", ".###.", "#....", ".###.", "....#", "####.", "....."]),
    ('t', [".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##.", "....."]),
    ('u', [".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#", "....."]),
    ('v', [".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..", "....."]),
    ('w', [".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#.", "....."]),
    ('x', [".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "....."]),
    ('y', [".....", ".....", "#...#", "#...#", "#...#", ".####", "....#", ".###."]),
    ('z', [".....", ".....", "#####", "...#.", "..#..", ".#...", "#####", "....."]),
];
