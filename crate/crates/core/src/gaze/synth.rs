//! Synthetic gaze for generated corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixation::{FixationRecord, TrialRecord};
use super::heatmap::{Heatmap, SATURATION_PCT};
use crate::corpus::text_page::WordBox;

/// A left-to-right reading pass: every word receives one to three
/// fixations, and each word's total share lies in `[0.02, 0.17]` percent.
pub fn reading_trial(page_id: &str, words: &[WordBox], seed: u64) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fixations = Vec::new();
    for wb in words.iter().filter(|w| w.width > 0) {
        let chars = wb.text.chars().count();
        let count = rng.random_range(1..=chars.clamp(1, 3));
        let total: f64 = rng.random_range(0.02..=SATURATION_PCT);
        let weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.5..1.5)).collect();
        let wsum: f64 = weights.iter().sum();
        for w in weights {
            let x = wb.x + rng.random_range(0..wb.width);
            let y = wb.y + wb.height / 2 + rng.random_range(0..2);
            fixations.push(FixationRecord::on_word(x as f64, y as f64, wb.index, total * w / wsum));
        }
    }
    TrialRecord::new(page_id, fixations)
}

/// Positional fixations drawn with probability proportional to squared
/// saliency; brighter locations also receive longer fixations.
pub fn fixations_from_saliency(page_id: &str, map: &Heatmap, count: usize, seed: u64) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = map.values().iter().map(|&v| (v as f64 / 255.0).powi(2)).collect();
    let total: f64 = weights.iter().sum();
    let mut fixations = Vec::with_capacity(count);
    if total <= 0.0 {
        return TrialRecord::new(page_id, fixations);
    }
    for _ in 0..count {
        let mut target = rng.random_range(0.0..total);
        let mut idx = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if target < *w {
                idx = i;
                break;
            }
            target -= w;
        }
        let (x, y) = (idx % map.width(), idx / map.width());
        let share = map.values()[idx] as f64 / 255.0;
        let pct = SATURATION_PCT * share * rng.random_range(0.6..=1.0);
        fixations.push(FixationRecord::at(x as f64, y as f64, pct));
    }
    TrialRecord::new(page_id, fixations)
}
