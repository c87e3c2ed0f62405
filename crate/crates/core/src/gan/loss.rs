//! Adversarial and reconstruction losses.

use candle_core::Tensor;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores are clamped into `[EPS, 1 - EPS]` before taking logarithms.
pub const EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Weight of the L1 term, measured in 0..255 intensity units.
    pub lambda_l1: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { lambda_l1: 0.01 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_l1 >= 0.0) || !self.lambda_l1.is_finite() {
            return Err(Error::Config(format!("lambda_l1 must be >= 0, got {}", self.lambda_l1)));
        }
        Ok(())
    }
}

fn neg_log(p: &Tensor) -> Result<Tensor> {
    Ok(p.clamp(EPS, 1.0 - EPS)?.log()?.neg()?)
}

/// Binary cross entropy of the discriminator:
/// `mean(-log d_real) + mean(-log(1 - d_fake))`.
pub fn d_loss(d_real: &Tensor, d_fake: &Tensor) -> Result<Tensor> {
    let real = neg_log(d_real)?.mean_all()?;
    let fake = neg_log(&(d_fake.neg()? + 1.0)?)?.mean_all()?;
    Ok((real + fake)?)
}

/// The generator objective split into its parts.
#[derive(Debug, Clone)]
pub struct GeneratorLoss {
    pub total: Tensor,
    pub adversarial: Tensor,
    pub l1: Tensor,
}

/// `mean(-log d_fake) + lambda * mean|output - target|`, with images in
/// intensity units.
pub fn g_loss(d_fake: &Tensor, output: &Tensor, target: &Tensor, weights: LossWeights) -> Result<GeneratorLoss> {
    if output.dims() != target.dims() {
        return Err(Error::Shape(format!(
            "output {:?} and target {:?} differ",
            output.dims(),
            target.dims()
        )));
    }
    let adversarial = neg_log(d_fake)?.mean_all()?;
    let l1 = (output - target)?.abs()?.mean_all()?;
    let total = (&adversarial + (&l1 * weights.lambda_l1)?)?;
    Ok(GeneratorLoss { total, adversarial, l1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use candle_core::{DType, Device};
    use proptest::prelude::*;

    fn full(v: f64, shape: (usize, usize, usize, usize)) -> Tensor {
        Tensor::full(v, shape, &Device::Cpu).unwrap()
    }

    fn scalar(t: &Tensor) -> f64 {
        t.to_dtype(DType::F64).unwrap().to_scalar().unwrap()
    }

    #[test]
    fn d_loss_closed_forms() {
        let half = full(0.5, (2, 1, 3, 3));
        let v = scalar(&d_loss(&half, &half).unwrap());
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let perfect = scalar(&d_loss(&full(1.0, (1, 1, 2, 2)), &full(0.0, (1, 1, 2, 2))).unwrap());
        // Clamping leaves -2 ln(1 - 1e-7) ~ 2e-7.
        assert!(perfect > 0.0 && perfect < 3e-7);
    }

    #[test]
    fn d_loss_symmetric_at_half() {
        let a = full(0.5, (1, 1, 2, 2));
        let b = full(0.5, (1, 1, 2, 2));
        assert_eq!(scalar(&d_loss(&a, &b).unwrap()), scalar(&d_loss(&b, &a).unwrap()));
    }

    #[test]
    fn g_loss_closed_forms() {
        let d = full(0.5, (1, 1, 4, 4));
        let target = Tensor::arange(0.0f64, 48.0, &Device::Cpu).unwrap().reshape((1, 3, 4, 4)).unwrap();
        let w = LossWeights::default();
        let same = g_loss(&d, &target, &target, w).unwrap();
        assert!((scalar(&same.total) - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(scalar(&same.l1), 0.0);
        let shifted = (&target + 1.0).unwrap();
        let plus = g_loss(&d, &shifted, &target, w).unwrap();
        assert!((scalar(&plus.total) - scalar(&same.total) - 0.01).abs() < 1e-12);
        let pure = g_loss(&d, &shifted, &target, LossWeights { lambda_l1: 0.0 }).unwrap();
        assert_eq!(scalar(&pure.total), scalar(&pure.adversarial));
        let wrong = full(0.0, (1, 3, 4, 5));
        assert!(matches!(g_loss(&d, &wrong, &target, w), Err(Error::Shape(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn g_loss_monotone_in_l1(a in 0.0..50.0f64, b in 0.0..50.0f64, lambda in 0.0..10.0f64, p in 0.01..0.99f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let d = full(p, (1, 1, 2, 2));
            let t = full(100.0, (1, 3, 2, 2));
            let w = LossWeights { lambda_l1: lambda };
            let l_lo = scalar(&g_loss(&d, &(&t + lo).unwrap(), &t, w).unwrap().total);
            let l_hi = scalar(&g_loss(&d, &(&t + hi).unwrap(), &t, w).unwrap().total);
            prop_assert!(l_lo <= l_hi + 1e-12);
        }

        #[test]
        fn d_loss_is_positive_off_the_limit(r in 0.001..0.999f64, f in 0.001..0.999f64) {
            let v = scalar(&d_loss(&full(r, (1, 1, 1, 1)), &full(f, (1, 1, 1, 1))).unwrap());
            prop_assert!(v > 0.0);
            prop_assert!((v - (-r.ln() - (1.0 - f).ln())).abs() < 1e-9);
        }
    }
}
