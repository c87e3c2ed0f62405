//! Patch discriminator scoring overlapping patches of a (condition, image) pair.

use candle_core::{DType, Tensor};
use serde::{Deserialize, Serialize};

use super::layers::{leaky_relu, sigmoid, BatchNorm, Conv2d, ParamSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    /// Condition channels plus image channels.
    pub in_channels: usize,
    pub layers: usize,
    pub base_filters: usize,
}

impl Default for DiscriminatorSpec {
    fn default() -> Self {
        Self {
            in_channels: 4,
            layers: 3,
            base_filters: 64,
        }
    }
}

impl DiscriminatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.in_channels == 0 || self.base_filters == 0 {
            return Err(Error::Config("discriminator sizes must be positive".into()));
        }
        Ok(())
    }

    fn filters(&self, i: usize) -> usize {
        self.base_filters * (1usize << i.min(3))
    }

    /// Side of the score grid for a square input of side `side`, or `None`
    /// when the input is too small for the layer stack.
    pub fn grid_side(&self, side: usize) -> Option<usize> {
        let mut n = side as isize;
        // (kernel, stride, padding) of every convolution in order.
        let stack = std::iter::repeat_n((4, 2, 1), self.layers).chain([(4, 1, 1), (4, 1, 1)]);
        for (k, s, p) in stack {
            let span = n + 2 * p - k;
            if span < 0 {
                return None;
            }
            n = span / s + 1;
        }
        (n > 0).then_some(n as usize)
    }
}

struct Block {
    conv: Conv2d,
    bn: Option<BatchNorm>,
}

pub struct Discriminator {
    spec: DiscriminatorSpec,
    blocks: Vec<Block>,
    head: Conv2d,
    params: ParamSet,
}

impl Discriminator {
    pub fn new(spec: DiscriminatorSpec, dtype: DType) -> Result<Self> {
        spec.validate()?;
        let mut params = ParamSet::default();
        let mut blocks = Vec::with_capacity(spec.layers + 1);
        for i in 0..=spec.layers {
            let c_in = if i == 0 { spec.in_channels } else { spec.filters(i - 1) };
            let stride = if i < spec.layers { 2 } else { 1 };
            let first = i == 0;
            let name = format!("layer{i}");
            let conv = Conv2d::new(&mut params, &format!("{name}.conv"), c_in, spec.filters(i), 4, stride, 1, first, dtype)?;
            let bn = if first {
                None
            } else {
                Some(BatchNorm::new(&mut params, &format!("{name}.bn"), spec.filters(i), false, dtype)?)
            };
            blocks.push(Block { conv, bn });
        }
        let head = Conv2d::new(&mut params, "head.conv", spec.filters(spec.layers), 1, 4, 1, 1, true, dtype)?;
        Ok(Self {
            spec,
            blocks,
            head,
            params,
        })
    }

    pub fn spec(&self) -> &DiscriminatorSpec {
        &self.spec
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// Scores in `(0, 1)` with shape `(batch, 1, grid, grid)`.
    pub fn forward(&self, condition: &Tensor, image: &Tensor) -> Result<Tensor> {
        let x = Tensor::cat(&[condition, image], 1)?;
        let c = x.dim(1)?;
        if c != self.spec.in_channels {
            return Err(Error::Config(format!(
                "discriminator expects {} channels, got {c}",
                self.spec.in_channels
            )));
        }
        let (_, _, h, w) = x.dims4()?;
        if self.spec.grid_side(h.min(w)).is_none() {
            return Err(Error::Config(format!("input {h}x{w} too small for the discriminator")));
        }
        let mut cur = x;
        for b in &self.blocks {
            cur = b.conv.forward(&cur)?;
            if let Some(bn) = &b.bn {
                // Always batch statistics: the discriminator is never used for inference.
                cur = bn.forward(&cur, true)?;
            }
            cur = leaky_relu(&cur, 0.2)?;
        }
        sigmoid(&self.head.forward(&cur)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use candle_core::Device;

    #[test]
    fn thirty_by_thirty_grid_at_256() {
        // By hand: 256 -> 128 -> 64 -> 32 (stride 2), then 32 + 2 - 4 + 1 = 31, 31 + 2 - 4 + 1 = 30.
        let spec = DiscriminatorSpec {
            base_filters: 2,
            ..Default::default()
        };
        assert_eq!(spec.grid_side(256), Some(30));
        let d = Discriminator::new(spec, DType::F32).unwrap();
        let cond = Tensor::zeros((1, 1, 256, 256), DType::F32, &Device::Cpu).unwrap();
        let img = Tensor::zeros((1, 3, 256, 256), DType::F32, &Device::Cpu).unwrap();
        assert_eq!(d.forward(&cond, &img).unwrap().dims4().unwrap(), (1, 1, 30, 30));
    }

    #[test]
    fn channel_mismatch_is_a_config_error() {
        let d = Discriminator::new(DiscriminatorSpec { base_filters: 2, ..Default::default() }, DType::F32).unwrap();
        let cond = Tensor::zeros((1, 2, 64, 64), DType::F32, &Device::Cpu).unwrap();
        let img = Tensor::zeros((1, 3, 64, 64), DType::F32, &Device::Cpu).unwrap();
        assert!(matches!(d.forward(&cond, &img), Err(Error::Config(_))));
        assert_eq!(DiscriminatorSpec { layers: 3, ..Default::default() }.grid_side(16), None);
    }
}
