//! Text-page analysis: binarization, word segments and glyph recognition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{GlyphAtlas, RowGeometry};
use crate::error::{Error, Result};
use crate::image::Image;

/// Minimum run of blank columns that separates two words.
pub const GAP_MIN: usize = 3;

/// Fraction of the cell area a best match may differ by before the cell
/// counts as invalid.
pub const REJECT_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextMask {
    pub width: usize,
    pub height: usize,
    /// Row-major, `true` on text pixels.
    pub data: Vec<bool>,
}

impl TextMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    /// `false` outside the mask.
    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Text pixels of an encoded page (green > 127) or of its display form
/// (luma < 128). Three-channel images whose blue channel is essentially
/// empty are read as encoded.
pub fn binarize_text(image: &Image) -> TextMask {
    let (w, h) = (image.width(), image.height());
    let data = match image.channels() {
        3 => {
            let blue = image.channel(2);
            let mean_blue = blue.iter().map(|&v| v as f64).sum::<f64>() / blue.len().max(1) as f64;
            if mean_blue < 64.0 {
                image.channel(1).iter().map(|&g| g > 127.0).collect()
            } else {
                image.luma().iter().map(|&l| l < 128.0).collect()
            }
        }
        1 => image.data().iter().map(|&v| v < 128.0).collect(),
        _ => image.channel(0).iter().map(|&v| v < 128.0).collect(),
    };
    TextMask { width: w, height: h, data }
}

/// A word-like run of columns inside one row band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub band: usize,
    pub start: usize,
    pub len: usize,
}

/// Segments in reading order: band by band, left to right.
pub fn segment_spans(mask: &TextMask, geometry: &RowGeometry) -> Vec<Segment> {
    let mut out = Vec::new();
    for (b, band) in geometry.bands.iter().enumerate() {
        let bottom = band.bottom.min(mask.height);
        let inked: Vec<bool> = (0..mask.width)
            .map(|x| (band.top..bottom).any(|y| mask.get(x, y)))
            .collect();
        let mut current: Option<(usize, usize)> = None;
        for (x, &ink) in inked.iter().enumerate() {
            if !ink {
                continue;
            }
            current = match current {
                Some((s, e)) if x - e - 1 < GAP_MIN => Some((s, x)),
                Some((s, e)) => {
                    out.push(Segment { band: b, start: s, len: e - s + 1 });
                    Some((x, x))
                }
                None => Some((x, x)),
            };
        }
        if let Some((s, e)) = current {
            out.push(Segment { band: b, start: s, len: e - s + 1 });
        }
    }
    out
}

/// Pixel widths of the word segments, in reading order.
pub fn segment_words(mask: &TextMask, geometry: &RowGeometry) -> Vec<usize> {
    segment_spans(mask, geometry).iter().map(|s| s.len).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentHistogram {
    pub bins: BTreeMap<usize, usize>,
}

impl SegmentHistogram {
    pub fn total(&self) -> usize {
        self.bins.values().sum()
    }

    /// Most populated length; ties go to the shorter length.
    pub fn mode(&self) -> Option<usize> {
        let best = *self.bins.values().max()?;
        self.bins.iter().find(|(_, &c)| c == best).map(|(&l, _)| l)
    }
}

pub fn histogram(lengths: &[usize]) -> SegmentHistogram {
    let mut bins = BTreeMap::new();
    for &l in lengths {
        *bins.entry(l).or_insert(0) += 1;
    }
    SegmentHistogram { bins }
}

/// Total-variation distance between the normalized histograms.
pub fn compare_histograms(a: &SegmentHistogram, b: &SegmentHistogram) -> Result<f64> {
    let (na, nb) = (a.total(), b.total());
    if na == 0 || nb == 0 {
        return Err(Error::UndefinedDivergence(format!(
            "histograms hold {na} and {nb} segments"
        )));
    }
    let mut keys: Vec<usize> = a.bins.keys().chain(b.bins.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    // Cross-multiplied integer counts keep identity and disjointness exact.
    let (na, nb) = (na as u128, nb as u128);
    let sum: u128 = keys
        .iter()
        .map(|k| {
            let p = *a.bins.get(k).unwrap_or(&0) as u128 * nb;
            let q = *b.bins.get(k).unwrap_or(&0) as u128 * na;
            p.abs_diff(q)
        })
        .sum();
    Ok(sum as f64 / (2 * na * nb) as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphReport {
    pub total_chars: usize,
    pub invalid_chars: usize,
    /// How often each character was recognized.
    pub confusion: BTreeMap<char, usize>,
    /// Recognized words in reading order, `?` marking invalid cells.
    pub words: Vec<String>,
}

impl GlyphReport {
    pub fn valid_fraction(&self) -> f64 {
        if self.total_chars == 0 {
            1.0
        } else {
            1.0 - self.invalid_chars as f64 / self.total_chars as f64
        }
    }

    /// `(truth, recognized)` pair counts for words whose lengths agree with
    /// the reference; other words are skipped.
    pub fn confusions_against<S: AsRef<str>>(&self, truth: &[S]) -> BTreeMap<(char, char), usize> {
        let mut out = BTreeMap::new();
        for (got, want) in self.words.iter().zip(truth) {
            let want = want.as_ref();
            if got.chars().count() != want.chars().count() {
                continue;
            }
            for (g, t) in got.chars().zip(want.chars()) {
                *out.entry((t, g)).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Slices every segment into advance-wide cells and matches each cell
/// against the atlas by Hamming distance.
pub fn recognize_glyphs(image: &Image, atlas: &GlyphAtlas, geometry: &RowGeometry) -> GlyphReport {
    let mask = binarize_text(image);
    let (gw, gh) = (atlas.glyph_width(), atlas.glyph_height());
    let limit = REJECT_FRACTION * atlas.cell_area() as f64;
    let mut report = GlyphReport::default();
    for seg in segment_spans(&mask, geometry) {
        let top = geometry.bands[seg.band].glyph_top;
        let cells = ((seg.len + gw / 2) / gw).max(1);
        let mut word = String::with_capacity(cells);
        for k in 0..cells {
            let x0 = seg.start + k * gw;
            let mut best = (usize::MAX, '?');
            for (ch, bm) in atlas.glyphs() {
                let mut d = 0;
                for r in 0..gh {
                    for c in 0..gw {
                        d += usize::from(bm[r * gw + c] != mask.get(x0 + c, top + r));
                    }
                }
                if d < best.0 {
                    best = (d, ch);
                }
            }
            report.total_chars += 1;
            if best.0 as f64 > limit {
                report.invalid_chars += 1;
                word.push('?');
            } else {
                *report.confusion.entry(best.1).or_insert(0) += 1;
                word.push(best.1);
            }
        }
        report.words.push(word);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{render_text_page, text_page, TextPageSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn page(words: &[&str]) -> (Image, RowGeometry) {
        let mut all = words.to_vec();
        all.resize(15, "");
        let spec = TextPageSpec::new(&all);
        let atlas = GlyphAtlas::standard();
        let img = render_text_page(&spec, &atlas).unwrap().into_image();
        (img, spec.row_geometry(atlas.metrics()))
    }

    fn random_words(seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atlas = GlyphAtlas::standard();
        (0..3).flat_map(|_| text_page::fill_row_words(&mut rng, &atlas, 240, 5)).collect()
    }

    #[test]
    fn binarize_matches_renderer_and_display_form() {
        let words = random_words(4);
        let spec = TextPageSpec::new(&words);
        let rendered = render_text_page(&spec, &GlyphAtlas::standard()).unwrap();
        let mask = binarize_text(rendered.image());
        assert_eq!(mask.data, rendered.glyph_mask());
        let display = text_page::to_display(&rendered);
        assert_eq!(binarize_text(&display), mask);
        let geom = spec.row_geometry(GlyphAtlas::standard().metrics());
        assert_eq!(segment_words(&binarize_text(&display), &geom), segment_words(&mask, &geom));
    }

    #[test]
    fn blank_page_and_threshold_boundaries() {
        let (blank, geom) = page(&[]);
        assert_eq!(binarize_text(&blank).count(), 0);
        assert!(segment_words(&binarize_text(&blank), &geom).is_empty());
        assert_eq!(recognize_glyphs(&blank, &GlyphAtlas::standard(), &geom).total_chars, 0);

        let mut enc = Image::solid_rgb(2, 1, [255.0, 0.0, 0.0]);
        enc.set(1, 0, 0, 127.0);
        enc.set(1, 0, 1, 128.0);
        assert_eq!(binarize_text(&enc).data, vec![false, true]);
        let disp = Image::from_vec(1, 1, 2, vec![128.0, 127.0]).unwrap();
        assert_eq!(binarize_text(&disp).data, vec![false, true]);
    }

    #[test]
    fn cat_is_three_advances_wide() {
        let (img, geom) = page(&["cat"]);
        assert_eq!(segment_words(&binarize_text(&img), &geom), vec![24]);
    }

    #[test]
    fn full_page_lengths_follow_the_word_list() {
        for seed in 0..5 {
            let words = random_words(seed);
            let spec = TextPageSpec::new(&words);
            let atlas = GlyphAtlas::standard();
            let img = render_text_page(&spec, &atlas).unwrap().into_image();
            let geom = spec.row_geometry(atlas.metrics());
            let expect: Vec<usize> = words.iter().map(|w| 8 * w.chars().count()).collect();
            assert_eq!(segment_words(&binarize_text(&img), &geom), expect);
        }
    }

    #[test]
    fn clean_pages_recognize_perfectly() {
        let atlas = GlyphAtlas::standard();
        for seed in 0..5 {
            let words = random_words(seed + 10);
            let spec = TextPageSpec::new(&words);
            let img = render_text_page(&spec, &atlas).unwrap().into_image();
            let r = recognize_glyphs(&img, &atlas, &spec.row_geometry(atlas.metrics()));
            assert_eq!(r.invalid_chars, 0);
            assert_eq!(r.total_chars, words.iter().map(|w| w.len()).sum::<usize>());
            assert_eq!(r.words, words);
            let conf = r.confusions_against(&words);
            assert!(conf.iter().all(|((t, g), _)| t == g));
        }
    }

    #[test]
    fn checkerboard_cell_is_the_only_invalid_one() {
        let atlas = GlyphAtlas::standard();
        let (gw, gh) = (atlas.glyph_width(), atlas.glyph_height());
        let board: Vec<bool> = (0..gw * gh).map(|i| (i / gw + i % gw) % 2 == 0).collect();
        // The corruption must be rejected against every template.
        for (ch, bm) in atlas.glyphs() {
            let d = bm.iter().zip(&board).filter(|(a, b)| a != b).count();
            assert!(d as f64 > 0.25 * (gw * gh) as f64, "{ch} is {d} away");
        }
        let (mut img, geom) = page(&["house", "cat"]);
        let top = geom.bands[0].glyph_top;
        // Second letter of "house".
        let x0 = 8 + gw;
        for r in 0..gh {
            for c in 0..gw {
                img.set(1, top + r, x0 + c, if board[r * gw + c] { 255.0 } else { 0.0 });
            }
        }
        let r = recognize_glyphs(&img, &atlas, &geom);
        assert_eq!((r.total_chars, r.invalid_chars), (8, 1));
        assert_eq!(r.words, vec!["h?use", "cat"]);
    }

    #[test]
    fn histogram_comparisons() {
        let h = histogram(&[24, 24, 32]);
        assert_eq!(h.total(), 3);
        assert_eq!(h.mode(), Some(24));
        assert_eq!(compare_histograms(&h, &h).unwrap(), 0.0);
        assert_eq!(compare_histograms(&h, &histogram(&[8, 16])).unwrap(), 1.0);
        assert!(matches!(
            compare_histograms(&h, &histogram(&[])),
            Err(Error::UndefinedDivergence(_))
        ));
    }

    fn arb_mask() -> impl Strategy<Value = TextMask> {
        proptest::collection::vec(proptest::bool::weighted(0.3), 40 * 24).prop_map(|data| TextMask {
            width: 40,
            height: 24,
            data,
        })
    }

    fn small_geometry() -> RowGeometry {
        RowGeometry::new(24, 2, crate::corpus::AtlasMetrics::default(), 0)
    }

    proptest! {
        #[test]
        fn segments_conserve_the_span(mask in arb_mask()) {
            let geom = small_geometry();
            let segs = segment_spans(&mask, &geom);
            for (b, band) in geom.bands.iter().enumerate() {
                let cols: Vec<usize> = (0..mask.width)
                    .filter(|&x| (band.top..band.bottom).any(|y| mask.get(x, y)))
                    .collect();
                let row: Vec<&Segment> = segs.iter().filter(|s| s.band == b).collect();
                if cols.is_empty() {
                    prop_assert!(row.is_empty());
                    continue;
                }
                let span = cols.last().unwrap() - cols[0] + 1;
                let lens: usize = row.iter().map(|s| s.len).sum();
                let gaps: usize = row.windows(2).map(|w| w[1].start - (w[0].start + w[0].len)).sum();
                prop_assert_eq!(lens + gaps, span);
                prop_assert!(row.windows(2).all(|w| w[1].start - (w[0].start + w[0].len) >= GAP_MIN));
            }
        }

        #[test]
        fn tv_distance_is_a_metric(
            a in proptest::collection::vec(1usize..12, 1..20),
            b in proptest::collection::vec(1usize..12, 1..20),
            c in proptest::collection::vec(1usize..12, 1..20),
        ) {
            let (ha, hb, hc) = (histogram(&a), histogram(&b), histogram(&c));
            prop_assert_eq!(ha.total(), a.len());
            let ab = compare_histograms(&ha, &hb).unwrap();
            prop_assert_eq!(ab, compare_histograms(&hb, &ha).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(compare_histograms(&ha, &ha).unwrap(), 0.0);
            let ac = compare_histograms(&ha, &hc).unwrap();
            let cb = compare_histograms(&hc, &hb).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}
