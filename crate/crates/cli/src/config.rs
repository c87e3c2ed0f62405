//! Run configuration: defaults, then the JSON file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gazegen::corpus::dataset::HeatProvider;
use gazegen::corpus::{AtlasMetrics, DatasetKind};
use gazegen::training::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Everything one command needs. Training fields sit at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Corpus kind for `gen-corpus`.
    pub kind: Option<DatasetKind>,
    /// Item count for `gen-corpus`.
    pub n: usize,
    /// Newspaper page side; text pages are fixed at 256.
    pub side: usize,
    pub sigma: f64,
    /// Heatmap source; defaults to fixations for text, heuristic for newspapers.
    pub provider: Option<HeatProvider>,
    pub precomputed_dir: Option<PathBuf>,
    pub atlas: AtlasMetrics,
    /// Write a checkpoint every this many epochs (0: final only).
    pub checkpoint_every: usize,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            out: None,
            kind: None,
            n: 16,
            side: 256,
            sigma: gazegen::gaze::DEFAULT_SIGMA_PX,
            provider: None,
            precomputed_dir: None,
            atlas: AtlasMetrics::default(),
            checkpoint_every: 0,
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    /// Resolves `file` (if any) with `overrides` applied on top.
    pub fn resolve(file: Option<&Path>, overrides: Map<String, Value>) -> Result<Self> {
        let mut root = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                match v {
                    Value::Object(m) => m,
                    _ => bail!("config {} must be a JSON object", p.display()),
                }
            }
            None => Map::new(),
        };
        root.extend(overrides);
        // `flatten` rules out serde's deny_unknown_fields, so check by hand.
        let Value::Object(known) = serde_json::to_value(RunConfig::default())? else {
            unreachable!("RunConfig serializes to an object")
        };
        if let Some(k) = root.keys().find(|k| !known.contains_key(*k)) {
            bail!("unknown configuration field `{k}`");
        }
        let cfg: RunConfig = serde_json::from_value(Value::Object(root)).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.atlas != AtlasMetrics::default() {
            bail!(
                "only the built-in {}x{} glyph atlas is available",
                AtlasMetrics::default().glyph_width_px,
                AtlasMetrics::default().glyph_height_px
            );
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            bail!("sigma must be positive, got {}", self.sigma);
        }
        Ok(())
    }

    pub fn dataset(&self) -> Result<&Path> {
        let p = self.dataset.as_deref().context("no dataset given (--dataset or \"dataset\" in the config)")?;
        if !p.exists() {
            bail!("dataset {} does not exist", p.display());
        }
        Ok(p)
    }

    pub fn out(&self) -> Result<&Path> {
        self.out.as_deref().context("no output directory given (--out or \"out\" in the config)")
    }

    /// Echoes the resolved configuration into `dir`.
    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        gazegen::io::write_json(&dir.join("resolved_config.json"), self)?;
        Ok(())
    }
}

/// Parses `key=value`; the value is read as JSON and falls back to a string.
pub fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.json");
        std::fs::write(&file, r#"{"seed": 5, "epochs": 3, "sigma": 4.0}"#).unwrap();
        let mut flags = Map::new();
        flags.insert("seed".into(), Value::from(9));
        let cfg = RunConfig::resolve(Some(&file), flags).unwrap();
        assert_eq!(cfg.train.seed, 9);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.sigma, 4.0);
        assert_eq!(cfg.train.batch_size, TrainConfig::default().batch_size);
    }

    #[test]
    fn unknown_and_bad_fields_are_rejected() {
        let mut flags = Map::new();
        flags.insert("epochz".into(), Value::from(1));
        assert!(RunConfig::resolve(None, flags).is_err());
        let mut flags = Map::new();
        flags.insert("batch_size".into(), Value::from(0));
        assert!(RunConfig::resolve(None, flags).is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::default();
        let v = serde_json::to_value(&cfg).unwrap();
        assert!(v.get("seed").is_some() && v.get("learning_rate").is_some());
        let Value::Object(m) = v else { unreachable!() };
        assert_eq!(RunConfig::resolve(None, m).unwrap(), cfg);
    }

    #[test]
    fn assignments_parse_json_or_strings() {
        assert_eq!(parse_assignment("lambda_l1=0.5").unwrap(), ("lambda_l1".into(), Value::from(0.5)));
        assert_eq!(parse_assignment("regime=text").unwrap(), ("regime".into(), Value::from("text")));
        assert!(parse_assignment("nonsense").is_err());
    }
}
