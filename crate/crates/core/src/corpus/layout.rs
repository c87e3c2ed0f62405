//! Synthetic newspaper layouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Text,
    Picture,
}

/// Axis-aligned rectangle `[x, x + width) x [y, y + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub kind: RegionKind,
}

impl Region {
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    /// True if the rectangles share at least one pixel.
    pub fn intersects(&self, other: &Region) -> bool {
        self.x < other.x + other.width
            && other.x < self.x + self.width
            && self.y < other.y + other.height
            && other.y < self.y + self.height
    }

    fn intersects_with_gap(&self, other: &Region, gap: usize) -> bool {
        self.x < other.x + other.width + gap
            && other.x < self.x + self.width + gap
            && self.y < other.y + other.height + gap
            && other.y < self.y + self.height + gap
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewspaperLayout {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<Region>,
}

impl NewspaperLayout {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            regions: Vec::new(),
        }
    }

    /// Checks bounds and pairwise disjointness.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.regions.iter().enumerate() {
            if r.width == 0 || r.height == 0 {
                return Err(Error::Layout(format!("region {i} is empty")));
            }
            if r.x + r.width > self.width || r.y + r.height > self.height {
                return Err(Error::Layout(format!("region {i} leaves the page")));
            }
            for (j, s) in self.regions.iter().enumerate().skip(i + 1) {
                if r.intersects(s) {
                    return Err(Error::Layout(format!("regions {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    pub fn count(&self, kind: RegionKind) -> usize {
        self.regions.iter().filter(|r| r.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConstraints {
    pub page_width: usize,
    pub page_height: usize,
    /// Blank border kept free of regions.
    pub margin: usize,
    /// Minimum blank spacing between regions.
    pub gap: usize,
    pub min_text: usize,
    pub max_text: usize,
    pub min_picture: usize,
    pub max_picture: usize,
    pub min_side: usize,
    pub max_side: usize,
}

impl LayoutConstraints {
    /// Defaults scaled to a square page of the given side.
    pub fn for_page(side: usize) -> Self {
        Self {
            page_width: side,
            page_height: side,
            margin: (side / 32).max(1),
            gap: (side / 64).max(1),
            min_text: 1,
            max_text: 3,
            min_picture: 1,
            max_picture: 2,
            min_side: (side * 3 / 16).max(12),
            max_side: side / 2,
        }
    }

    fn check(&self) -> Result<()> {
        let infeasible = |reason: &str| {
            Err(Error::Generation {
                attempts: 0,
                reason: reason.to_string(),
            })
        };
        let usable_w = self.page_width.saturating_sub(2 * self.margin);
        let usable_h = self.page_height.saturating_sub(2 * self.margin);
        if self.min_text > self.max_text || self.min_picture > self.max_picture {
            return infeasible("region count bounds are inverted");
        }
        if self.max_text + self.max_picture == 0 {
            return infeasible("no regions allowed");
        }
        if self.min_side == 0 || self.min_side > self.max_side {
            return infeasible("region side bounds are inverted or zero");
        }
        if self.min_side > usable_w.min(usable_h) {
            return infeasible("minimum region side exceeds the usable page");
        }
        let required = (self.min_text + self.min_picture) * self.min_side * self.min_side;
        if required > usable_w * usable_h {
            return infeasible("minimum regions cannot fit in the usable page area");
        }
        Ok(())
    }
}

impl Default for LayoutConstraints {
    fn default() -> Self {
        Self::for_page(256)
    }
}

const MAX_ATTEMPTS: usize = 200;
const PLACEMENT_TRIES: usize = 64;

/// Rejection-samples a layout; pure function of `(seed, constraints)`.
pub fn sample_newspaper_layout(seed: u64, constraints: &LayoutConstraints) -> Result<NewspaperLayout> {
    constraints.check()?;
    let c = constraints;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let usable_w = c.page_width - 2 * c.margin;
    let usable_h = c.page_height - 2 * c.margin;
    let max_w = c.max_side.min(usable_w);
    let max_h = c.max_side.min(usable_h);

    'attempt: for _ in 0..MAX_ATTEMPTS {
        let n_text = rng.random_range(c.min_text..=c.max_text);
        let n_picture = rng.random_range(c.min_picture..=c.max_picture);
        if n_text + n_picture == 0 {
            continue;
        }
        // Pictures first: they are larger on average and harder to place.
        let kinds = std::iter::repeat_n(RegionKind::Picture, n_picture)
            .chain(std::iter::repeat_n(RegionKind::Text, n_text));
        let mut regions: Vec<Region> = Vec::with_capacity(n_text + n_picture);
        for kind in kinds {
            let mut placed = None;
            for _ in 0..PLACEMENT_TRIES {
                let width = rng.random_range(c.min_side..=max_w);
                let height = rng.random_range(c.min_side..=max_h);
                let x = c.margin + rng.random_range(0..=usable_w - width);
                let y = c.margin + rng.random_range(0..=usable_h - height);
                let cand = Region {
                    x,
                    y,
                    width,
                    height,
                    kind,
                };
                if regions.iter().all(|r| !r.intersects_with_gap(&cand, c.gap)) {
                    placed = Some(cand);
                    break;
                }
            }
            match placed {
                Some(r) => regions.push(r),
                None => continue 'attempt,
            }
        }
        let layout = NewspaperLayout {
            width: c.page_width,
            height: c.page_height,
            regions,
        };
        debug_assert!(layout.validate().is_ok());
        return Ok(layout);
    }
    Err(Error::Generation {
        attempts: MAX_ATTEMPTS,
        reason: "could not place all regions without overlap".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_layout() {
        let c = LayoutConstraints::default();
        assert_eq!(
            sample_newspaper_layout(11, &c).unwrap(),
            sample_newspaper_layout(11, &c).unwrap()
        );
    }

    #[test]
    fn full_page_picture_is_forced() {
        let c = LayoutConstraints {
            min_text: 0,
            max_text: 0,
            min_picture: 1,
            max_picture: 1,
            min_side: 248,
            max_side: 248,
            margin: 4,
            ..LayoutConstraints::for_page(256)
        };
        let layout = sample_newspaper_layout(5, &c).unwrap();
        assert_eq!(
            layout.regions,
            vec![Region {
                x: 4,
                y: 4,
                width: 248,
                height: 248,
                kind: RegionKind::Picture
            }]
        );
    }

    #[test]
    fn thousand_layouts_never_overlap() {
        let c = LayoutConstraints::default();
        for seed in 0..1000 {
            let layout = sample_newspaper_layout(seed, &c).unwrap();
            // Brute force: every region pair, every pixel of the smaller one.
            for (i, a) in layout.regions.iter().enumerate() {
                for b in &layout.regions[i + 1..] {
                    let overlap = (a.y..a.y + a.height)
                        .any(|y| (a.x..a.x + a.width).any(|x| b.contains(x, y)));
                    assert!(!overlap, "seed {seed}: {a:?} overlaps {b:?}");
                }
                assert!(a.x + a.width <= 256 && a.y + a.height <= 256);
            }
            assert!(layout.count(RegionKind::Text) >= 1);
            assert!(layout.count(RegionKind::Picture) >= 1);
        }
    }

    #[test]
    fn infeasible_constraints_fail() {
        let c = LayoutConstraints {
            min_side: 300,
            max_side: 300,
            ..LayoutConstraints::default()
        };
        assert!(matches!(
            sample_newspaper_layout(0, &c),
            Err(Error::Generation { .. })
        ));
        let crowded = LayoutConstraints {
            min_text: 8,
            max_text: 8,
            min_side: 120,
            max_side: 120,
            ..LayoutConstraints::default()
        };
        assert!(sample_newspaper_layout(0, &crowded).is_err());
    }
}
