//! RMSProp.

use candle_core::backprop::GradStore;
use candle_core::{Tensor, Var};

use crate::error::Result;
use crate::gan::ParamSet;

/// `acc = rho * acc + (1 - rho) * g^2`, `step = lr * g / (sqrt(acc) + eps)`;
/// with momentum `m = momentum * m + step` is applied instead of `step`.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub momentum: f64,
    pub epsilon: f64,
    /// Squared-gradient averages, one per trainable parameter.
    pub accumulators: Vec<Tensor>,
    /// Momentum buffers; empty when `momentum == 0`.
    pub velocities: Vec<Tensor>,
}

impl RmsProp {
    pub fn new(params: &ParamSet, learning_rate: f64, decay_rate: f64, momentum: f64, epsilon: f64) -> Result<Self> {
        let zeros = || {
            params
                .vars()
                .map(|v| Tensor::zeros_like(v.as_tensor()))
                .collect::<candle_core::Result<Vec<_>>>()
        };
        Ok(Self {
            learning_rate,
            decay_rate,
            momentum,
            epsilon,
            accumulators: zeros()?,
            velocities: if momentum > 0.0 { zeros()? } else { Vec::new() },
        })
    }

    pub fn step(&mut self, params: &ParamSet, grads: &GradStore) -> Result<()> {
        let vars: Vec<&Var> = params.vars().collect();
        for (i, var) in vars.into_iter().enumerate() {
            let Some(g) = grads.get(var.as_tensor()) else {
                continue;
            };
            // Gradients carry op history; keeping it in the state would chain every step's graph.
            let g = g.detach();
            let rho = self.decay_rate;
            let acc = ((&self.accumulators[i] * rho)? + (g.sqr()? * (1.0 - rho))?)?;
            let denom = (acc.sqrt()? + self.epsilon)?;
            self.accumulators[i] = acc;
            if self.learning_rate == 0.0 {
                continue;
            }
            let step = (g.div(&denom)? * self.learning_rate)?.detach();
            let delta = if self.momentum > 0.0 {
                let v = ((&self.velocities[i] * self.momentum)? + step)?;
                self.velocities[i] = v.clone();
                v
            } else {
                step
            };
            var.set(&(var.as_tensor().detach() - delta)?)?;
        }
        Ok(())
    }
}
