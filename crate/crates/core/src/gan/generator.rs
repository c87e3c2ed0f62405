//! U-Net generator.
//!
//! Encoder level `i` (level 0 being the input itself) is concatenated onto
//! decoder level `depth - i` at the same resolution, so a model of depth `d`
//! has `d` skip connections. The last one feeds the raw condition into a
//! 3x3 output convolution.

use candle_core::{DType, Tensor};
use serde::{Deserialize, Serialize};

use super::layers::{dropout, leaky_relu, BatchNorm, Conv2d, ConvTranspose2d, Mode, ParamSet};
use crate::error::{Error, Result};

/// Decoder levels (counted from the innermost) that apply dropout.
pub const DROPOUT_LEVELS: std::ops::RangeInclusive<usize> = 2..=4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub depth: usize,
    pub base_filters: usize,
    pub dropout_rate: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            in_channels: 1,
            out_channels: 3,
            depth: 8,
            base_filters: 64,
            dropout_rate: 0.5,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.out_channels != 3 {
            return Err(Error::Config(format!(
                "generator out_channels must be 3, got {}",
                self.out_channels
            )));
        }
        if self.depth == 0 || self.depth > 16 {
            return Err(Error::Config(format!("generator depth {} out of range", self.depth)));
        }
        if self.in_channels == 0 || self.base_filters == 0 {
            return Err(Error::Config("generator channels must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout rate {} not in [0, 1)", self.dropout_rate)));
        }
        Ok(())
    }

    /// Checks that `2^depth` divides both sides.
    pub fn check_side(&self, height: usize, width: usize) -> Result<()> {
        let unit = 1usize << self.depth;
        if height % unit != 0 || width % unit != 0 || height == 0 || width == 0 {
            return Err(Error::Config(format!(
                "image {height}x{width} is not divisible by 2^{} = {unit}",
                self.depth
            )));
        }
        Ok(())
    }

    /// Filters of encoder output `i` (0-based).
    pub fn filters(&self, i: usize) -> usize {
        self.base_filters * (1usize << i.min(3))
    }

    pub fn skip_connections(&self) -> usize {
        self.depth
    }
}

struct Down {
    conv: Conv2d,
    bn: Option<BatchNorm>,
    pre_activation: bool,
}

struct Up {
    conv: ConvTranspose2d,
    bn: BatchNorm,
    dropout: bool,
}

pub struct Generator {
    spec: GeneratorSpec,
    dtype: DType,
    down: Vec<Down>,
    up: Vec<Up>,
    out: Conv2d,
    params: ParamSet,
}

impl Generator {
    pub fn new(spec: GeneratorSpec, dtype: DType) -> Result<Self> {
        spec.validate()?;
        let d = spec.depth;
        let mut params = ParamSet::default();
        let mut down = Vec::with_capacity(d);
        for i in 0..d {
            let c_in = if i == 0 { spec.in_channels } else { spec.filters(i - 1) };
            let plain = i == 0 || i == d - 1;
            let name = format!("enc{i}");
            let conv = Conv2d::new(&mut params, &format!("{name}.conv"), c_in, spec.filters(i), 4, 2, 1, plain, dtype)?;
            let bn = if plain {
                None
            } else {
                Some(BatchNorm::new(&mut params, &format!("{name}.bn"), spec.filters(i), true, dtype)?)
            };
            down.push(Down {
                conv,
                bn,
                pre_activation: i > 0,
            });
        }
        let mut up = Vec::with_capacity(d);
        for k in 1..=d {
            // Output of decoder level k sits at the resolution of encoder output d-1-k.
            let c_in = if k == 1 { spec.filters(d - 1) } else { 2 * spec.filters(d - k) };
            let c_out = if k == d { spec.base_filters } else { spec.filters(d - 1 - k) };
            let name = format!("dec{k}");
            let conv = ConvTranspose2d::new(&mut params, &format!("{name}.conv"), c_in, c_out, false, dtype)?;
            let bn = BatchNorm::new(&mut params, &format!("{name}.bn"), c_out, true, dtype)?;
            up.push(Up {
                conv,
                bn,
                dropout: DROPOUT_LEVELS.contains(&k) && k < d && spec.dropout_rate > 0.0,
            });
        }
        let out = Conv2d::new(
            &mut params,
            "out.conv",
            spec.base_filters + spec.in_channels,
            spec.out_channels,
            3,
            1,
            1,
            true,
            dtype,
        )?;
        Ok(Self {
            spec,
            dtype,
            down,
            up,
            out,
            params,
        })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// Maps a `(batch, in_channels, h, w)` condition in `[-1, 1]` to a
    /// `(batch, 3, h, w)` image in `(-1, 1)`.
    pub fn forward(&self, x: &Tensor, mut mode: Mode<'_>) -> Result<Tensor> {
        let (_, c, h, w) = x.dims4()?;
        if c != self.spec.in_channels {
            return Err(Error::Shape(format!(
                "generator expects {} input channels, got {c}",
                self.spec.in_channels
            )));
        }
        self.spec.check_side(h, w)?;
        let (batch_stats, update) = (mode.batch_stats(), mode.is_train());
        let mut skips = Vec::with_capacity(self.spec.depth);
        let mut hcur = x.clone();
        for layer in &self.down {
            let input = if layer.pre_activation {
                leaky_relu(&hcur, 0.2)?
            } else {
                hcur.clone()
            };
            let mut y = layer.conv.forward(&input)?;
            if let Some(bn) = &layer.bn {
                y = bn.normalize(&y, batch_stats, update)?;
            }
            skips.push(y.clone());
            hcur = y;
        }
        let d = self.spec.depth;
        let mut cur = skips[d - 1].clone();
        for (idx, layer) in self.up.iter().enumerate() {
            let k = idx + 1;
            let mut y = layer.conv.forward(&cur.relu()?)?;
            y = layer.bn.normalize(&y, batch_stats, update)?;
            if layer.dropout {
                if let Mode::Train(rng) = &mut mode {
                    y = dropout(&y, self.spec.dropout_rate, rng)?;
                }
            }
            cur = if k < d {
                Tensor::cat(&[&y, &skips[d - 1 - k]], 1)?
            } else {
                Tensor::cat(&[&y.relu()?, x], 1)?
            };
        }
        Ok(self.out.forward(&cur)?.tanh()?)
    }
}
