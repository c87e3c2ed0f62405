use serde::{Deserialize, Serialize};

use crate::corpus::dataset::{DatasetItem, DatasetKind};
use crate::error::{Error, Result};
use crate::gan::{DiscriminatorSpec, GeneratorSpec, LossWeights};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Heatmap to segmented newspaper page.
    Phase1,
    /// Segmented page to detailed page.
    Phase2,
    /// Heatmap merged with a generated segmentation, to detailed page.
    End2endStage2,
    /// Heatmap to encoded text page.
    Text,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Phase1 => "phase1",
            Regime::Phase2 => "phase2",
            Regime::End2endStage2 => "end2end_stage2",
            Regime::Text => "text",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase1" => Ok(Regime::Phase1),
            "phase2" => Ok(Regime::Phase2),
            "end2end_stage2" => Ok(Regime::End2endStage2),
            "text" => Ok(Regime::Text),
            other => Err(Error::Config(format!("unknown regime {other:?}"))),
        }
    }
}

impl Regime {
    pub fn dataset_kind(self) -> DatasetKind {
        match self {
            Regime::Text => DatasetKind::Text,
            _ => DatasetKind::Newspaper,
        }
    }

    pub fn condition_channels(self) -> usize {
        match self {
            Regime::Phase1 | Regime::Text => 1,
            Regime::Phase2 | Regime::End2endStage2 => 3,
        }
    }

    /// The (condition, target) pair of `item`. The end-to-end regime has no
    /// stored condition; its inputs come from a trained first stage.
    pub fn pair(self, item: &DatasetItem) -> Result<(Image, Image)> {
        let missing = |what: &str| Error::Config(format!("item {} has no {what} for regime {self}", item.id));
        match self {
            Regime::Phase1 => Ok((
                item.heat.as_ref().ok_or_else(|| missing("heatmap"))?.image().clone(),
                item.seg.clone().ok_or_else(|| missing("segmented page"))?,
            )),
            Regime::Phase2 => Ok((
                item.seg.clone().ok_or_else(|| missing("segmented page"))?,
                item.detail.clone().ok_or_else(|| missing("detailed page"))?,
            )),
            Regime::Text => Ok((
                item.heat.as_ref().ok_or_else(|| missing("heatmap"))?.image().clone(),
                item.text.clone().ok_or_else(|| missing("text page"))?,
            )),
            Regime::End2endStage2 => Err(Error::Config(
                "end2end_stage2 inputs are produced by train_end2end".into(),
            )),
        }
    }
}

/// Optimizer, schedule and model-size settings for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub momentum: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub lambda_l1: f64,
    pub regime: Regime,
    /// U-Net depth; `None` picks `min(8, log2(side))`.
    pub generator_depth: Option<usize>,
    pub generator_filters: usize,
    pub dropout_rate: f64,
    pub discriminator_layers: usize,
    pub discriminator_filters: usize,
    /// Which statistics generator batch normalization uses at inference.
    pub inference_norm: InferenceNorm,
}

/// Normalization statistics for a frozen generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceNorm {
    /// Running averages collected during training.
    Running,
    /// Statistics of the batch being generated, as during training.
    #[default]
    Batch,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            decay_rate: 0.9,
            momentum: 0.0,
            epsilon: 1e-6,
            batch_size: 2,
            epochs: 20,
            seed: 0,
            test_fraction: 0.2,
            lambda_l1: 0.01,
            regime: Regime::Phase1,
            generator_depth: None,
            generator_filters: 64,
            dropout_rate: 0.5,
            discriminator_layers: 3,
            discriminator_filters: 64,
            inference_norm: InferenceNorm::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("learning_rate", self.learning_rate),
            ("decay_rate", self.decay_rate),
            ("momentum", self.momentum),
            ("epsilon", self.epsilon),
            ("lambda_l1", self.lambda_l1),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        if self.decay_rate >= 1.0 {
            return Err(Error::Config(format!("decay_rate must be below 1, got {}", self.decay_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        self.loss_weights().validate()
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            lambda_l1: self.lambda_l1,
        }
    }

    /// Model shapes for square pages of side `side`.
    pub fn model_specs(&self, side: usize) -> Result<(GeneratorSpec, DiscriminatorSpec)> {
        let depth = match self.generator_depth {
            Some(d) => d,
            None => {
                if !side.is_power_of_two() {
                    return Err(Error::Config(format!("cannot infer a depth for side {side}")));
                }
                (side.trailing_zeros() as usize).min(8)
            }
        };
        let c = self.regime.condition_channels();
        let g = GeneratorSpec {
            in_channels: c,
            out_channels: 3,
            depth,
            base_filters: self.generator_filters,
            dropout_rate: self.dropout_rate,
        };
        g.validate()?;
        g.check_side(side, side)?;
        let d = DiscriminatorSpec {
            in_channels: c + 3,
            layers: self.discriminator_layers,
            base_filters: self.discriminator_filters,
        };
        d.validate()?;
        if d.grid_side(side).is_none() {
            return Err(Error::Config(format!(
                "{} discriminator layers do not fit a {side}px page",
                d.layers
            )));
        }
        Ok((g, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_stated_hyperparameters() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate, 0.001);
        assert_eq!(c.decay_rate, 0.9);
        assert_eq!(c.epsilon, 1e-6);
        assert_eq!(c.batch_size, 2);
        assert_eq!(c.test_fraction, 0.2);
        assert_eq!(c.lambda_l1, 0.01);
        c.validate().unwrap();
        let (g, d) = c.model_specs(256).unwrap();
        assert_eq!((g.depth, g.in_channels, d.in_channels), (8, 1, 4));
        let (g, _) = c.model_specs(64).unwrap();
        assert_eq!(g.depth, 6);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for bad in [
            TrainConfig { test_fraction: 1.0, ..Default::default() },
            TrainConfig { test_fraction: 0.0, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { learning_rate: -1.0, ..Default::default() },
            TrainConfig { lambda_l1: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn json_uses_snake_case_regimes_and_fills_defaults() {
        let c: TrainConfig = serde_json::from_str(r#"{"regime": "end2end_stage2", "epochs": 3}"#).unwrap();
        assert_eq!(c.regime, Regime::End2endStage2);
        assert_eq!(c.epochs, 3);
        assert_eq!(c.batch_size, 2);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"learning_rat": 1}"#).is_err());
    }
}
