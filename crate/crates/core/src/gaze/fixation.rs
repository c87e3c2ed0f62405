use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationRecord {
    #[serde(rename = "x")]
    pub x_px: f64,
    #[serde(rename = "y")]
    pub y_px: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_index: Option<usize>,
    /// Share of the total trial time, in percent.
    pub duration_pct: f64,
}

impl FixationRecord {
    pub fn at(x_px: f64, y_px: f64, duration_pct: f64) -> Self {
        Self {
            x_px,
            y_px,
            word_index: None,
            duration_pct,
        }
    }

    pub fn on_word(x_px: f64, y_px: f64, word_index: usize, duration_pct: f64) -> Self {
        Self {
            word_index: Some(word_index),
            ..Self::at(x_px, y_px, duration_pct)
        }
    }
}

/// One viewing session over one page; serialized as the fixation JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub page_id: String,
    pub fixations: Vec<FixationRecord>,
}

impl TrialRecord {
    pub fn new(page_id: impl Into<String>, fixations: Vec<FixationRecord>) -> Self {
        Self {
            page_id: page_id.into(),
            fixations,
        }
    }

    /// Total percentage per word index, over fixations that carry one.
    pub fn word_totals(&self) -> BTreeMap<usize, f64> {
        let mut totals = BTreeMap::new();
        for f in &self.fixations {
            if let Some(w) = f.word_index {
                *totals.entry(w).or_insert(0.0) += f.duration_pct;
            }
        }
        totals
    }

    /// The percentage that drives each fixation's brightness: the word total
    /// for word-tagged fixations, the fixation's own share otherwise.
    pub fn effective_percentages(&self) -> Vec<f64> {
        let totals = self.word_totals();
        self.fixations
            .iter()
            .map(|f| match f.word_index {
                Some(w) => totals[&w],
                None => f.duration_pct,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.fixations.iter().enumerate() {
            if !(f.duration_pct >= 0.0) {
                return Err(Error::Config(format!(
                    "fixation {i} has invalid duration {}",
                    f.duration_pct
                )));
            }
        }
        let total: f64 = self.word_totals().values().sum();
        if total > 100.0 + 1e-9 {
            return Err(Error::Config(format!(
                "per-word percentages sum to {total} > 100"
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, self)
    }
}
