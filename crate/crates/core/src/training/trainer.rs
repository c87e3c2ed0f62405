use std::path::Path;
use std::time::Instant;

use candle_core::{DType, Device, Tensor};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{ModelCheckpoint, NamedArray, RngState, CHECKPOINT_VERSION};
use super::config::TrainConfig;
use super::optim::RmsProp;
use crate::corpus::dataset::item_seed;
use crate::error::{Error, Result};
use crate::gan::{
    d_loss, g_loss, to_intensity, to_model_range, Discriminator, Generator, Mode, ParamSet,
};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based global step index.
    pub step: usize,
    pub d_loss: f64,
    pub g_adv: f64,
    /// Mean absolute error in 0..255 intensity units.
    pub g_l1: f64,
    /// Wall time since the trainer was created.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<StepRecord>,
}

impl TrainLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,d_loss,g_adv,g_l1,seconds\n");
        for r in &self.records {
            s.push_str(&format!("{},{},{},{},{:.6}\n", r.step, r.d_loss, r.g_adv, r.g_l1, r.seconds));
        }
        s
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn extend(&mut self, other: TrainLog) {
        self.records.extend(other.records);
    }
}

/// Converts same-sized images to a `(n, c, h, w)` tensor in the model range.
pub fn images_to_tensor(images: &[&Image]) -> Result<Tensor> {
    let first = images
        .first()
        .ok_or_else(|| Error::Shape("empty image batch".into()))?;
    let (c, h, w) = first.shape();
    let mut data = Vec::with_capacity(images.len() * c * h * w);
    for img in images {
        if img.shape() != (c, h, w) {
            return Err(Error::Shape(format!(
                "batch mixes shapes {:?} and {:?}",
                (c, h, w),
                img.shape()
            )));
        }
        data.extend_from_slice(img.data());
    }
    let t = Tensor::from_vec(data, (images.len(), c, h, w), &Device::Cpu)?;
    to_model_range(&t)
}

/// Converts model-range output back to clamped intensity images.
pub fn tensor_to_images(t: &Tensor) -> Result<Vec<Image>> {
    let (n, c, h, w) = t.dims4()?;
    let data: Vec<f32> = to_intensity(t)?.clamp(0.0, 255.0)?.flatten_all()?.to_vec1()?;
    let per = c * h * w;
    (0..n)
        .map(|i| Image::from_vec(c, h, w, data[i * per..(i + 1) * per].to_vec()))
        .collect()
}

/// Seeds of the generator init, discriminator init and training stream.
fn sub_seeds(seed: u64) -> (u64, u64, u64) {
    (item_seed(seed, 0), item_seed(seed, 1), item_seed(seed, 2))
}

/// Owns both models, their optimizers and the training random stream.
pub struct Trainer {
    pub config: TrainConfig,
    pub image_side: usize,
    pub generator: Generator,
    pub discriminator: Discriminator,
    opt_g: RmsProp,
    opt_d: RmsProp,
    rng: ChaCha8Rng,
    pub step: usize,
    pub epoch: usize,
    started: Instant,
}

impl Trainer {
    /// Freshly initialized models for square pages of side `image_side`.
    pub fn new(config: TrainConfig, image_side: usize) -> Result<Self> {
        config.validate()?;
        let (gs, ds) = config.model_specs(image_side)?;
        let generator = Generator::new(gs, DType::F32)?;
        let discriminator = Discriminator::new(ds, DType::F32)?;
        let (sg, sd, sr) = sub_seeds(config.seed);
        generator.init_weights(sg)?;
        discriminator.init_weights(sd)?;
        let opt = |p: &ParamSet| RmsProp::new(p, config.learning_rate, config.decay_rate, config.momentum, config.epsilon);
        Ok(Self {
            opt_g: opt(generator.params())?,
            opt_d: opt(discriminator.params())?,
            rng: ChaCha8Rng::seed_from_u64(sr),
            config,
            image_side,
            generator,
            discriminator,
            step: 0,
            epoch: 0,
            started: Instant::now(),
        })
    }

    /// One discriminator update followed by one generator update on a batch
    /// given in the model range.
    pub fn training_step(&mut self, condition: &Tensor, target: &Tensor) -> Result<StepRecord> {
        let fake = self.generator.forward(condition, Mode::Train(&mut self.rng))?;
        if fake.dims() != target.dims() {
            return Err(Error::Shape(format!(
                "generator output {:?} does not match target {:?}",
                fake.dims(),
                target.dims()
            )));
        }

        let ld = d_loss(
            &self.discriminator.forward(condition, target)?,
            &self.discriminator.forward(condition, &fake.detach())?,
        )?;
        let d_value = ld.to_scalar::<f32>()? as f64;
        let step = self.step + 1;
        if !d_value.is_finite() {
            return Err(Error::NonFiniteLoss {
                step,
                d_loss: d_value,
                g_loss: f64::NAN,
            });
        }
        let grads = ld.backward()?;
        self.opt_d.step(self.discriminator.params(), &grads)?;

        let gl = g_loss(
            &self.discriminator.forward(condition, &fake)?,
            &to_intensity(&fake)?,
            &to_intensity(target)?,
            self.config.loss_weights(),
        )?;
        let total = gl.total.to_scalar::<f32>()? as f64;
        if !total.is_finite() {
            return Err(Error::NonFiniteLoss {
                step,
                d_loss: d_value,
                g_loss: total,
            });
        }
        // Only the generator's optimizer consumes these gradients.
        let grads = gl.total.backward()?;
        self.opt_g.step(self.generator.params(), &grads)?;

        self.step = step;
        Ok(StepRecord {
            step,
            d_loss: d_value,
            g_adv: gl.adversarial.to_scalar::<f32>()? as f64,
            g_l1: gl.l1.to_scalar::<f32>()? as f64,
            seconds: self.started.elapsed().as_secs_f64(),
        })
    }

    /// Runs `epochs` passes over `pairs` of (condition, target) intensity
    /// images, reshuffling each epoch. `on_epoch` sees the trainer after
    /// every completed epoch.
    pub fn fit(
        &mut self,
        pairs: &[(Image, Image)],
        epochs: usize,
        mut on_epoch: impl FnMut(&Trainer) -> Result<()>,
    ) -> Result<TrainLog> {
        let mut log = TrainLog::default();
        if epochs == 0 {
            return Ok(log);
        }
        if pairs.is_empty() {
            return Err(Error::Config("no training pairs".into()));
        }
        let conds: Vec<Tensor> = pairs
            .iter()
            .map(|(c, _)| images_to_tensor(&[c]))
            .collect::<Result<_>>()?;
        let targets: Vec<Tensor> = pairs
            .iter()
            .map(|(_, t)| images_to_tensor(&[t]))
            .collect::<Result<_>>()?;
        for _ in 0..epochs {
            // A fresh permutation each epoch depends on the rng state alone, so resumed runs match.
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.shuffle(&mut self.rng);
            for batch in order.chunks(self.config.batch_size) {
                let c = Tensor::cat(&batch.iter().map(|&i| &conds[i]).collect::<Vec<_>>(), 0)?;
                let t = Tensor::cat(&batch.iter().map(|&i| &targets[i]).collect::<Vec<_>>(), 0)?;
                let rec = self.training_step(&c, &t)?;
                log::debug!(
                    "epoch {} step {}: d={:.4} adv={:.4} l1={:.2}",
                    self.epoch + 1,
                    rec.step,
                    rec.d_loss,
                    rec.g_adv,
                    rec.g_l1
                );
                log.records.push(rec);
            }
            self.epoch += 1;
            on_epoch(self)?;
        }
        Ok(log)
    }

    pub fn checkpoint(&self) -> Result<ModelCheckpoint> {
        let mut arrays = Vec::new();
        push_params(&mut arrays, "g", self.generator.params())?;
        push_params(&mut arrays, "d", self.discriminator.params())?;
        push_optimizer(&mut arrays, "opt.g", self.generator.params(), &self.opt_g)?;
        push_optimizer(&mut arrays, "opt.d", self.discriminator.params(), &self.opt_d)?;
        Ok(ModelCheckpoint {
            format_version: CHECKPOINT_VERSION,
            regime: self.config.regime,
            epoch: self.epoch,
            step: self.step,
            image_side: self.image_side,
            generator_spec: *self.generator.spec(),
            discriminator_spec: *self.discriminator.spec(),
            config: self.config.clone(),
            rng_state: RngState::capture(&self.rng),
            arrays,
        })
    }

    /// Rebuilds the full training state; training continues exactly as if
    /// it had never stopped.
    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<Self> {
        let mut t = Trainer::new(ckpt.config.clone(), ckpt.image_side)?;
        if *t.generator.spec() != ckpt.generator_spec || *t.discriminator.spec() != ckpt.discriminator_spec {
            return Err(Error::Checkpoint("model specs disagree with the stored config".into()));
        }
        load_params(ckpt, "g", t.generator.params())?;
        load_params(ckpt, "d", t.discriminator.params())?;
        load_optimizer(ckpt, "opt.g", t.generator.params(), &mut t.opt_g)?;
        load_optimizer(ckpt, "opt.d", t.discriminator.params(), &mut t.opt_d)?;
        t.rng = ckpt.rng_state.restore()?;
        t.step = ckpt.step;
        t.epoch = ckpt.epoch;
        Ok(t)
    }
}

fn to_array(name: String, t: &Tensor) -> Result<NamedArray> {
    Ok(NamedArray {
        name,
        shape: t.dims().to_vec(),
        data: t.flatten_all()?.to_dtype(DType::F32)?.to_vec1()?,
    })
}

fn push_params(out: &mut Vec<NamedArray>, prefix: &str, params: &ParamSet) -> Result<()> {
    for (name, var) in params.all() {
        out.push(to_array(format!("{prefix}.{name}"), var.as_tensor())?);
    }
    Ok(())
}

fn push_optimizer(out: &mut Vec<NamedArray>, prefix: &str, params: &ParamSet, opt: &RmsProp) -> Result<()> {
    for ((name, _), acc) in params.trainable.iter().zip(&opt.accumulators) {
        out.push(to_array(format!("{prefix}.acc.{name}"), acc)?);
    }
    for ((name, _), vel) in params.trainable.iter().zip(&opt.velocities) {
        out.push(to_array(format!("{prefix}.vel.{name}"), vel)?);
    }
    Ok(())
}

fn array_tensor(ckpt: &ModelCheckpoint, name: &str, like: &Tensor) -> Result<Tensor> {
    let a = ckpt
        .array(name)
        .ok_or_else(|| Error::Checkpoint(format!("missing array {name}")))?;
    if a.shape != like.dims() {
        return Err(Error::Checkpoint(format!(
            "array {name} has shape {:?}, model expects {:?}",
            a.shape,
            like.dims()
        )));
    }
    Ok(Tensor::from_vec(a.data.clone(), a.shape.as_slice(), &Device::Cpu)?.to_dtype(like.dtype())?)
}

pub(crate) fn load_params(ckpt: &ModelCheckpoint, prefix: &str, params: &ParamSet) -> Result<()> {
    for (name, var) in params.all() {
        var.set(&array_tensor(ckpt, &format!("{prefix}.{name}"), var.as_tensor())?)?;
    }
    Ok(())
}

fn load_optimizer(ckpt: &ModelCheckpoint, prefix: &str, params: &ParamSet, opt: &mut RmsProp) -> Result<()> {
    for (i, (name, var)) in params.trainable.iter().enumerate() {
        opt.accumulators[i] = array_tensor(ckpt, &format!("{prefix}.acc.{name}"), var.as_tensor())?;
        if !opt.velocities.is_empty() {
            opt.velocities[i] = array_tensor(ckpt, &format!("{prefix}.vel.{name}"), var.as_tensor())?;
        }
    }
    Ok(())
}
