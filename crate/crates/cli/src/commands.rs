use std::path::Path;

use anyhow::{bail, Context, Result};
use gazegen::corpus::dataset::{HeatProvider, SynthOptions};
use gazegen::corpus::{Dataset, DatasetKind};
use gazegen::eval::{evaluate, EvalPair, SsimConfig, TextEval};
use gazegen::training::{
    self, concat_end2end, split_dataset, ModelCheckpoint, Predictor, Regime, TrainOutcome,
};
use gazegen::Image;

use crate::config::RunConfig;

/// Item-level failures of a command that otherwise ran to completion.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Items {
    Train,
    Test,
    All,
}

pub fn gen_corpus(cfg: &RunConfig) -> Result<Outcome> {
    let kind = cfg.kind.context("gen-corpus needs --kind newspaper|text")?;
    if cfg.n == 0 {
        bail!("--n must be positive");
    }
    let out = cfg.out()?;
    let opts = SynthOptions {
        newspaper_side: cfg.side,
        with_heat: true,
        sigma: cfg.sigma,
        ..SynthOptions::default()
    };
    let dataset = Dataset::synthesize(kind, cfg.n, cfg.train.seed, opts)?;
    dataset
        .write(out)
        .with_context(|| format!("writing dataset to {}", out.display()))?;
    cfg.write_resolved(out)?;
    log::info!("wrote {} {kind} items to {}", dataset.len(), out.display());
    Ok(Outcome::default())
}

pub fn render_gaze(cfg: &RunConfig) -> Result<Outcome> {
    let dir = cfg.dataset()?;
    let out = cfg.out.as_deref().unwrap_or(dir);
    let mut dataset = Dataset::load(dir)?;
    let provider = cfg.provider.unwrap_or(match dataset.kind() {
        DatasetKind::Text => HeatProvider::Fixations,
        DatasetKind::Newspaper => HeatProvider::Heuristic,
    });
    let failures = dataset.render_heat(provider, cfg.sigma, cfg.precomputed_dir.as_deref());
    for (id, _) in &failures {
        // Never leave a stale map behind for an item that failed.
        if let Some(item) = dataset.items.iter_mut().find(|i| &i.id == id) {
            item.heat = None;
        }
        let stale = out.join("heat").join(format!("{id}.png"));
        if stale.exists() {
            std::fs::remove_file(&stale)?;
        }
    }
    dataset.write(out)?;
    cfg.write_resolved(out)?;
    log::info!(
        "rendered {} of {} heatmaps with the {provider:?} provider",
        dataset.len() - failures.len(),
        dataset.len()
    );
    Ok(Outcome {
        failures: failures.into_iter().map(|(id, e)| (id, e.to_string())).collect(),
    })
}

fn save_outcome(o: &TrainOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    o.checkpoint.save(&dir.join("checkpoint.ckpt"))?;
    o.log.save_csv(&dir.join("train_log.csv"))?;
    if let Some(last) = o.log.records.last() {
        log::info!(
            "{}: {} steps, final d_loss={:.4} g_adv={:.4} g_l1={:.2}",
            dir.display(),
            last.step,
            last.d_loss,
            last.g_adv,
            last.g_l1
        );
    }
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<Outcome> {
    let dataset = Dataset::load(cfg.dataset()?)?;
    let out = cfg.out()?;
    cfg.write_resolved(out)?;
    let tc = &cfg.train;
    let split = split_dataset(&dataset.manifest.item_ids, tc.test_fraction, tc.seed)?;
    gazegen::io::write_json(&out.join("split.json"), &split)?;
    if tc.regime == Regime::End2endStage2 {
        let o = training::train_end2end(&dataset, tc)?;
        save_outcome(&o.stage1, &out.join("stage1"))?;
        save_outcome(&o.stage2, &out.join("stage2"))?;
        return Ok(Outcome::default());
    }
    let every = cfg.checkpoint_every;
    let ckpt_dir = out.join("checkpoints");
    let o = training::train_with(&dataset, tc, |t| {
        if every > 0 && t.epoch % every == 0 {
            t.checkpoint()?
                .save(&ckpt_dir.join(format!("epoch_{:04}.ckpt", t.epoch)))?;
        }
        Ok(())
    })?;
    save_outcome(&o, out)?;
    Ok(Outcome::default())
}

pub fn infer(cfg: &RunConfig, checkpoint: &Path, stage1: Option<&Path>, items: Items) -> Result<Outcome> {
    let dataset = Dataset::load(cfg.dataset()?)?;
    let out = cfg.out()?;
    let ckpt = ModelCheckpoint::load(checkpoint)?;
    let regime = ckpt.regime;
    if dataset.kind() != regime.dataset_kind() {
        bail!(
            "checkpoint regime {regime} needs a {} dataset, got {}",
            regime.dataset_kind(),
            dataset.kind()
        );
    }
    let first = match (regime, stage1) {
        (Regime::End2endStage2, Some(p)) => Some(ModelCheckpoint::load(p)?),
        (Regime::End2endStage2, None) => bail!("an end2end_stage2 checkpoint needs --stage1"),
        _ => None,
    };
    // The split belongs to the run that drew it: stage 1 for end-to-end models.
    let split_cfg = &first.as_ref().unwrap_or(&ckpt).config;
    let split = split_dataset(&dataset.manifest.item_ids, split_cfg.test_fraction, split_cfg.seed)?;
    let ids = match items {
        Items::Train => split.train,
        Items::Test => split.test,
        Items::All => dataset.manifest.item_ids.clone(),
    };
    cfg.write_resolved(out)?;
    let predictor = Predictor::from_checkpoint(&ckpt)?;
    let stage1 = first.as_ref().map(Predictor::from_checkpoint).transpose()?;
    let gen_dir = out.join("generated");
    std::fs::create_dir_all(&gen_dir)?;
    let mut outcome = Outcome::default();
    for id in &ids {
        let item = dataset.item(id).expect("split ids come from the manifest");
        let result = (|| -> gazegen::Result<Image> {
            let condition = match &stage1 {
                Some(s1) => {
                    let heat = item
                        .heat
                        .as_ref()
                        .ok_or_else(|| gazegen::Error::Config(format!("item {id} has no heatmap")))?;
                    concat_end2end(heat, &s1.predict(heat.image())?.quantized())?
                }
                None => regime.pair(item)?.0,
            };
            predictor.predict(&condition)
        })();
        match result {
            Ok(img) => img.quantized().save_png(gen_dir.join(format!("{id}.png")))?,
            Err(e) => outcome.failures.push((id.clone(), e.to_string())),
        }
    }
    log::info!(
        "generated {} of {} pages into {}",
        ids.len() - outcome.failures.len(),
        ids.len(),
        gen_dir.display()
    );
    Ok(outcome)
}

pub fn eval(
    cfg: &RunConfig,
    generated: &Path,
    truth: Option<&Path>,
    target: Option<&str>,
    text: bool,
) -> Result<Outcome> {
    let out = cfg.out()?;
    let (truth_dir, target) = match truth {
        Some(t) => (t.to_path_buf(), target.unwrap_or("").to_string()),
        None => {
            let dir = cfg.dataset()?;
            let kind = gazegen::corpus::Manifest::load(dir)?.kind;
            let target = match (target, kind) {
                (Some(t), _) => t.to_string(),
                (None, DatasetKind::Text) => "text".to_string(),
                (None, DatasetKind::Newspaper) => match cfg.train.regime {
                    Regime::Phase2 | Regime::End2endStage2 => "detail".to_string(),
                    _ => "seg".to_string(),
                },
            };
            (dir.join(&target), target)
        }
    };
    let text = text || target == "text";
    let mut names: Vec<_> = std::fs::read_dir(generated)
        .with_context(|| format!("reading {}", generated.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "png"))
        .collect();
    names.sort();
    let mut pairs = Vec::new();
    let mut outcome = Outcome::default();
    for path in names {
        let id = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let loaded = Image::load_png(&path).and_then(|g| {
            let t = Image::load_png(truth_dir.join(format!("{id}.png")))?;
            if g.shape() != t.shape() {
                return Err(gazegen::Error::Shape(format!(
                    "generated {:?} vs truth {:?}",
                    g.shape(),
                    t.shape()
                )));
            }
            Ok((g, t))
        });
        match loaded {
            Ok((generated, truth)) => pairs.push(EvalPair { id, generated, truth }),
            Err(e) => outcome.failures.push((id, e.to_string())),
        }
    }
    if pairs.is_empty() {
        bail!("no comparable images in {}", generated.display());
    }
    let text_eval = TextEval::standard();
    let report = evaluate(&pairs, SsimConfig::default(), text.then_some(&text_eval))?;
    std::fs::create_dir_all(out)?;
    cfg.write_resolved(out)?;
    report.save(&out.join("eval_report.json"))?;
    log::info!("ssim_mean={:.4} over {} items", report.ssim_mean, pairs.len());
    if let Some(g) = report.glyph {
        log::info!("glyphs: {} of {} invalid", g.invalid, g.total);
    }
    Ok(outcome)
}
