//! Building blocks shared by the generator and discriminator.

use candle_core::{DType, Device, Tensor, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// How a forward pass treats batch normalization and dropout.
pub enum Mode<'a> {
    /// Batch statistics, running averages updated, dropout drawn from the rng.
    Train(&'a mut ChaCha8Rng),
    /// Running statistics, no dropout.
    Eval,
    /// Statistics of the batch being generated, no dropout, nothing updated.
    EvalBatchStats,
}

impl Mode<'_> {
    pub fn is_train(&self) -> bool {
        matches!(self, Mode::Train(_))
    }

    /// Whether batch normalization uses the statistics of the current batch.
    pub fn batch_stats(&self) -> bool {
        !matches!(self, Mode::Eval)
    }
}

/// Named trainable parameters and non-trainable buffers of one model.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    pub trainable: Vec<(String, Var)>,
    pub buffers: Vec<(String, Var)>,
}

impl ParamSet {
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.trainable.iter().map(|(_, v)| v)
    }

    pub fn count(&self) -> usize {
        self.trainable.iter().map(|(_, v)| v.elem_count()).sum()
    }

    /// Trainable and buffer tensors, in a stable order.
    pub fn all(&self) -> impl Iterator<Item = &(String, Var)> {
        self.trainable.iter().chain(self.buffers.iter())
    }
}

#[derive(Debug, Clone)]
pub struct Conv2d {
    pub weight: Var,
    pub bias: Option<Var>,
    pub stride: usize,
    pub padding: usize,
}

impl Conv2d {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: &mut ParamSet,
        name: &str,
        c_in: usize,
        c_out: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        bias: bool,
        dtype: DType,
    ) -> Result<Self> {
        let weight = Var::zeros((c_out, c_in, kernel, kernel), dtype, &Device::Cpu)?;
        params.trainable.push((format!("{name}.weight"), weight.clone()));
        let bias = if bias {
            let b = Var::zeros(c_out, dtype, &Device::Cpu)?;
            params.trainable.push((format!("{name}.bias"), b.clone()));
            Some(b)
        } else {
            None
        };
        Ok(Self {
            weight,
            bias,
            stride,
            padding,
        })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let y = x.conv2d(self.weight.as_tensor(), self.padding, self.stride, 1, 1)?;
        add_bias(y, self.bias.as_ref())
    }
}

/// 4x4 transposed convolution with stride 2 and padding 1: doubles each side.
#[derive(Debug, Clone)]
pub struct ConvTranspose2d {
    pub weight: Var,
    pub bias: Option<Var>,
}

impl ConvTranspose2d {
    pub fn new(params: &mut ParamSet, name: &str, c_in: usize, c_out: usize, bias: bool, dtype: DType) -> Result<Self> {
        let weight = Var::zeros((c_in, c_out, 4, 4), dtype, &Device::Cpu)?;
        params.trainable.push((format!("{name}.weight"), weight.clone()));
        let bias = if bias {
            let b = Var::zeros(c_out, dtype, &Device::Cpu)?;
            params.trainable.push((format!("{name}.bias"), b.clone()));
            Some(b)
        } else {
            None
        };
        Ok(Self { weight, bias })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let y = x.conv_transpose2d(self.weight.as_tensor(), 1, 0, 2, 1)?;
        add_bias(y, self.bias.as_ref())
    }
}

fn add_bias(y: Tensor, bias: Option<&Var>) -> Result<Tensor> {
    match bias {
        Some(b) => {
            let c = b.dim(0)?;
            Ok(y.broadcast_add(&b.as_tensor().reshape((1, c, 1, 1))?)?)
        }
        None => Ok(y),
    }
}

#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub gamma: Var,
    pub beta: Var,
    /// Present when the layer keeps running statistics for evaluation.
    pub running: Option<(Var, Var)>,
    pub momentum: f64,
    pub eps: f64,
}

impl BatchNorm {
    pub const MOMENTUM: f64 = 0.1;
    pub const EPS: f64 = 1e-5;

    pub fn new(params: &mut ParamSet, name: &str, channels: usize, track_running: bool, dtype: DType) -> Result<Self> {
        let gamma = Var::ones(channels, dtype, &Device::Cpu)?;
        let beta = Var::zeros(channels, dtype, &Device::Cpu)?;
        params.trainable.push((format!("{name}.gamma"), gamma.clone()));
        params.trainable.push((format!("{name}.beta"), beta.clone()));
        let running = if track_running {
            let m = Var::zeros(channels, dtype, &Device::Cpu)?;
            let v = Var::ones(channels, dtype, &Device::Cpu)?;
            params.buffers.push((format!("{name}.running_mean"), m.clone()));
            params.buffers.push((format!("{name}.running_var"), v.clone()));
            Some((m, v))
        } else {
            None
        };
        Ok(Self {
            gamma,
            beta,
            running,
            momentum: Self::MOMENTUM,
            eps: Self::EPS,
        })
    }

    /// Batch statistics (updating the running averages) when `train`,
    /// running statistics otherwise.
    pub fn forward(&self, x: &Tensor, train: bool) -> Result<Tensor> {
        self.normalize(x, train, train)
    }

    /// Layers without running statistics always use the batch.
    pub fn normalize(&self, x: &Tensor, batch_stats: bool, update: bool) -> Result<Tensor> {
        let c = x.dim(1)?;
        let (mean, var) = match (&self.running, batch_stats) {
            (Some((rm, rv)), false) => (
                rm.as_tensor().reshape((1, c, 1, 1))?,
                rv.as_tensor().reshape((1, c, 1, 1))?,
            ),
            _ => {
                let mean = x.mean_keepdim((0, 2, 3))?;
                let centered = x.broadcast_sub(&mean)?;
                let var = centered.sqr()?.mean_keepdim((0, 2, 3))?;
                if update {
                    if let Some((rm, rv)) = &self.running {
                        let n = x.elem_count() / c;
                        let unbiased = if n > 1 { n as f64 / (n - 1) as f64 } else { 1.0 };
                        let m = self.momentum;
                        let bm = mean.detach().flatten_all()?;
                        let bv = (var.detach().flatten_all()? * unbiased)?;
                        rm.set(&((rm.as_tensor() * (1.0 - m))? + (bm * m)?)?)?;
                        rv.set(&((rv.as_tensor() * (1.0 - m))? + (bv * m)?)?)?;
                    }
                }
                (mean, var)
            }
        };
        let norm = x.broadcast_sub(&mean)?.broadcast_div(&(var + self.eps)?.sqrt()?)?;
        let g = self.gamma.as_tensor().reshape((1, c, 1, 1))?;
        let b = self.beta.as_tensor().reshape((1, c, 1, 1))?;
        Ok(norm.broadcast_mul(&g)?.broadcast_add(&b)?)
    }
}

pub fn leaky_relu(x: &Tensor, slope: f64) -> Result<Tensor> {
    // max(x, slope * x) for slope < 1
    Ok(x.maximum(&(x * slope)?)?)
}

pub fn sigmoid(x: &Tensor) -> Result<Tensor> {
    Ok((x.neg()?.exp()? + 1.0)?.recip()?)
}

/// Inverted dropout with a mask drawn from `rng`.
pub fn dropout(x: &Tensor, rate: f64, rng: &mut ChaCha8Rng) -> Result<Tensor> {
    if rate <= 0.0 {
        return Ok(x.clone());
    }
    let keep = 1.0 - rate;
    let n = x.elem_count();
    let mask: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect();
    let mask = Tensor::from_vec(mask, x.shape(), x.device())?.to_dtype(x.dtype())?;
    Ok(x.mul(&mask)?)
}
