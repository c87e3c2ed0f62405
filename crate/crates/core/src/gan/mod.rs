//! Conditional GAN: U-Net generator, patch discriminator, initialization and losses.

pub mod discriminator;
pub mod generator;
pub mod gradcheck;
pub mod layers;
pub mod loss;

use candle_core::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use discriminator::{Discriminator, DiscriminatorSpec};
pub use generator::{Generator, GeneratorSpec};
pub use layers::{Mode, ParamSet};
pub use loss::{d_loss, g_loss, GeneratorLoss, LossWeights};

use crate::error::Result;

/// Half-width of the uniform initialization interval.
pub const INIT_RANGE: f64 = 0.05;

/// Draws every convolution weight and bias from `Uniform(-0.05, 0.05)` in
/// parameter order from one seeded stream. Normalization scales and shifts
/// restart at 1 and 0, running statistics at 0 and 1.
pub fn init_weights(params: &ParamSet, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, var) in &params.trainable {
        let t = var.as_tensor();
        let fill = if name.ends_with(".gamma") {
            Tensor::ones_like(t)?
        } else if name.ends_with(".beta") {
            Tensor::zeros_like(t)?
        } else {
            let v: Vec<f64> = (0..t.elem_count())
                .map(|_| rng.random_range(-INIT_RANGE..INIT_RANGE))
                .collect();
            Tensor::from_vec(v, t.shape(), t.device())?.to_dtype(t.dtype())?
        };
        var.set(&fill)?;
    }
    for (name, var) in &params.buffers {
        let t = var.as_tensor();
        let fill = if name.ends_with(".running_var") {
            Tensor::ones_like(t)?
        } else {
            Tensor::zeros_like(t)?
        };
        var.set(&fill)?;
    }
    Ok(())
}

impl Generator {
    pub fn init_weights(&self, seed: u64) -> Result<()> {
        init_weights(self.params(), seed)
    }
}

impl Discriminator {
    pub fn init_weights(&self, seed: u64) -> Result<()> {
        init_weights(self.params(), seed)
    }
}

/// Maps 0..255 intensities to the generator's `[-1, 1]` range.
pub fn to_model_range(t: &Tensor) -> Result<Tensor> {
    Ok(t.affine(1.0 / 127.5, -1.0)?)
}

/// Inverse of [`to_model_range`].
pub fn to_intensity(t: &Tensor) -> Result<Tensor> {
    Ok(t.affine(127.5, 127.5)?)
}
