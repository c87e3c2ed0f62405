//! Training regimes, alternating updates, checkpoints and inference.

pub mod checkpoint;
pub mod config;
pub mod optim;
pub mod split;
pub mod trainer;

pub use checkpoint::{ModelCheckpoint, NamedArray, RngState, CHECKPOINT_VERSION};
pub use config::{InferenceNorm, Regime, TrainConfig};
pub use optim::RmsProp;
pub use split::{split_dataset, Split};
pub use trainer::{images_to_tensor, tensor_to_images, StepRecord, TrainLog, Trainer};

use candle_core::DType;

use crate::corpus::dataset::{Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::gan::{Generator, Mode};
use crate::gaze::Heatmap;
use crate::image::Image;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: ModelCheckpoint,
    pub log: TrainLog,
    pub split: Split,
}

fn square_side(dataset: &Dataset) -> Result<usize> {
    let s = dataset.manifest.page_size;
    if s.width != s.height {
        return Err(Error::Config(format!(
            "pages must be square, got {}x{}",
            s.width, s.height
        )));
    }
    Ok(s.width)
}

fn check_kind(dataset: &Dataset, kind: DatasetKind, what: &str) -> Result<()> {
    if dataset.kind() != kind {
        return Err(Error::Config(format!(
            "{what} needs a {kind} dataset, got {}",
            dataset.kind()
        )));
    }
    Ok(())
}

/// Trains `config.regime` on the training split of `dataset`.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(dataset, config, |_| Ok(()))
}

/// [`train`] with a callback after every epoch (for periodic checkpoints).
pub fn train_with(
    dataset: &Dataset,
    config: &TrainConfig,
    on_epoch: impl FnMut(&Trainer) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if config.regime == Regime::End2endStage2 {
        return Err(Error::Config(
            "end2end_stage2 is trained through train_end2end".into(),
        ));
    }
    check_kind(dataset, config.regime.dataset_kind(), &format!("regime {}", config.regime))?;
    let side = square_side(dataset)?;
    let split = split_dataset(&dataset.manifest.item_ids, config.test_fraction, config.seed)?;
    let pairs = collect_pairs(dataset, &split.train, config.regime)?;
    let mut trainer = Trainer::new(config.clone(), side)?;
    let log = trainer.fit(&pairs, config.epochs, on_epoch)?;
    Ok(TrainOutcome {
        checkpoint: trainer.checkpoint()?,
        log,
        split,
    })
}

fn collect_pairs(dataset: &Dataset, ids: &[String], regime: Regime) -> Result<Vec<(Image, Image)>> {
    ids.iter()
        .map(|id| {
            let item = dataset
                .item(id)
                .ok_or_else(|| Error::Config(format!("no item {id:?}")))?;
            regime.pair(item)
        })
        .collect()
}

/// A frozen generator for deterministic inference.
/// Pages are generated one at a time, so with batch statistics each output
/// depends on its own condition alone.
pub struct Predictor {
    generator: Generator,
    norm: InferenceNorm,
}

impl Predictor {
    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<Self> {
        let generator = Generator::new(ckpt.generator_spec, DType::F32)?;
        trainer::load_params(ckpt, "g", generator.params())?;
        Ok(Self {
            generator,
            norm: ckpt.config.inference_norm,
        })
    }

    /// Overrides the normalization statistics recorded in the checkpoint.
    pub fn with_norm(mut self, norm: InferenceNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn in_channels(&self) -> usize {
        self.generator.spec().in_channels
    }

    /// Generated intensities in `[0, 255]`, unquantized.
    pub fn predict(&self, condition: &Image) -> Result<Image> {
        if condition.channels() != self.in_channels() {
            return Err(Error::Shape(format!(
                "checkpoint expects {} input channels, got {}",
                self.in_channels(),
                condition.channels()
            )));
        }
        let x = images_to_tensor(&[condition])?;
        let mode = match self.norm {
            InferenceNorm::Running => Mode::Eval,
            InferenceNorm::Batch => Mode::EvalBatchStats,
        };
        let y = self.generator.forward(&x, mode)?;
        Ok(tensor_to_images(&y)?.remove(0))
    }
}

/// One-shot inference from a checkpoint.
pub fn infer(ckpt: &ModelCheckpoint, condition: &Image) -> Result<Image> {
    Predictor::from_checkpoint(ckpt)?.predict(condition)
}

/// Merges a heatmap into a segmentation for the second end-to-end stage:
/// red is the saturating sum, blue is copied, green is 255 exactly where the
/// segmentation is pure white.
pub fn concat_end2end(heat: &Heatmap, seg: &Image) -> Result<Image> {
    if seg.channels() != 3 || seg.height() != heat.height() || seg.width() != heat.width() {
        return Err(Error::Shape(format!(
            "heatmap {}x{} and segmentation {:?} do not match",
            heat.height(),
            heat.width(),
            seg.shape()
        )));
    }
    let mut out = Image::new(3, seg.height(), seg.width());
    let n = seg.height() * seg.width();
    for i in 0..n {
        let (r, g, b) = (seg.channel(0)[i], seg.channel(1)[i], seg.channel(2)[i]);
        out.channel_mut(0)[i] = (heat.values()[i] + r).min(255.0);
        out.channel_mut(2)[i] = b;
        out.channel_mut(1)[i] = if r == 255.0 && g == 255.0 && b == 255.0 { 255.0 } else { 0.0 };
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct End2EndOutcome {
    pub stage1: TrainOutcome,
    pub stage2: TrainOutcome,
    /// Stage-2 conditions of every item, built from stage-1 generations.
    pub stage2_inputs: Vec<(String, Image)>,
}

/// Trains phase 1, freezes it, then trains a freshly initialized second
/// stage (seed + 1) on `concat_end2end(heat, stage1(heat))` to detailed pages.
/// Both stages use the same split, drawn with `config.seed`.
pub fn train_end2end(dataset: &Dataset, config: &TrainConfig) -> Result<End2EndOutcome> {
    let stage1_cfg = TrainConfig {
        regime: Regime::Phase1,
        ..config.clone()
    };
    let stage2_cfg = TrainConfig {
        regime: Regime::End2endStage2,
        seed: config.seed.wrapping_add(1),
        ..config.clone()
    };
    stage1_cfg.validate()?;
    stage2_cfg.model_specs(square_side(dataset)?)?;
    check_kind(dataset, DatasetKind::Newspaper, "end-to-end training")?;
    for item in &dataset.items {
        if item.heat.is_none() || item.seg.is_none() || item.detail.is_none() {
            return Err(Error::Config(format!(
                "item {} lacks a heatmap, segmentation or detailed page",
                item.id
            )));
        }
    }

    let stage1 = train(dataset, &stage1_cfg)?;
    let predictor = Predictor::from_checkpoint(&stage1.checkpoint)?;
    let mut stage2_inputs = Vec::with_capacity(dataset.len());
    for item in &dataset.items {
        let heat = item.heat.as_ref().expect("checked above");
        // Stage 1's output is an image: snap it to 8-bit pixels before merging.
        let seg = predictor.predict(heat.image())?.quantized();
        stage2_inputs.push((item.id.clone(), concat_end2end(heat, &seg)?));
    }
    let split = stage1.split.clone();
    let pairs: Vec<(Image, Image)> = split
        .train
        .iter()
        .map(|id| {
            let input = &stage2_inputs.iter().find(|(i, _)| i == id).expect("every item has an input").1;
            let detail = dataset.item(id).and_then(|i| i.detail.clone()).expect("checked above");
            (input.clone(), detail)
        })
        .collect();
    let mut trainer = Trainer::new(stage2_cfg.clone(), square_side(dataset)?)?;
    let log = trainer.fit(&pairs, stage2_cfg.epochs, |_| Ok(()))?;
    let stage2 = TrainOutcome {
        checkpoint: trainer.checkpoint()?,
        log,
        split,
    };
    Ok(End2EndOutcome {
        stage1,
        stage2,
        stage2_inputs,
    })
}
