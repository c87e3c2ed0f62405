//! Finite-difference verification of the losses' analytic gradients.

use candle_core::{DType, Device, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    d_loss, g_loss, init_weights, to_intensity, Discriminator, DiscriminatorSpec, Generator, GeneratorSpec,
    LossWeights, Mode,
};
use crate::error::Result;

/// The miniature model pair used for gradient checks on 8x8 images.
pub fn miniature() -> (GeneratorSpec, DiscriminatorSpec) {
    (
        GeneratorSpec {
            in_channels: 1,
            out_channels: 3,
            depth: 2,
            base_filters: 2,
            dropout_rate: 0.0,
        },
        DiscriminatorSpec {
            in_channels: 4,
            layers: 1,
            base_filters: 2,
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub parameters: usize,
    /// Worst relative error over discriminator parameters of `d_loss`.
    pub d_max_rel_err: f64,
    /// Worst relative error over generator parameters of `g_loss`.
    pub g_max_rel_err: f64,
    /// Largest gradient `d_loss` leaks into the generator (should be 0).
    pub d_loss_generator_leak: f64,
}

fn scalar(t: &Tensor) -> Result<f64> {
    Ok(t.to_scalar::<f64>()?)
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

fn grad_values(grads: &candle_core::backprop::GradStore, var: &Var) -> Result<Vec<f64>> {
    Ok(match grads.get(var.as_tensor()) {
        Some(g) => g.flatten_all()?.to_vec1()?,
        None => vec![0.0; var.elem_count()],
    })
}

/// Central differences with step `h` over every parameter of the
/// miniature pair, in double precision.
pub fn check_gradients(seed: u64, h: f64) -> Result<GradCheckReport> {
    let (gs, ds) = miniature();
    let g = Generator::new(gs, DType::F64)?;
    let d = Discriminator::new(ds, DType::F64)?;
    init_weights(g.params(), seed)?;
    init_weights(d.params(), seed.wrapping_add(1))?;
    let dev = Device::Cpu;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cond = random_tensor(&mut rng, (2, 1, 8, 8), -1.0, 1.0, &dev)?;
    let real = random_tensor(&mut rng, (2, 3, 8, 8), -1.0, 1.0, &dev)?;
    let target = to_intensity(&real)?;
    let weights = LossWeights { lambda_l1: 0.01 };

    // Batch statistics, so the normalization gradients are exercised too.
    let gen = |g: &Generator| -> Result<Tensor> { g.forward(&cond, Mode::Train(&mut ChaCha8Rng::seed_from_u64(0))) };
    let loss_d = |g: &Generator, d: &Discriminator| -> Result<Tensor> {
        let fake = gen(g)?.detach();
        d_loss(&d.forward(&cond, &real)?, &d.forward(&cond, &fake)?)
    };
    let loss_g = |g: &Generator, d: &Discriminator| -> Result<Tensor> {
        let fake = gen(g)?;
        let out = to_intensity(&fake)?;
        Ok(g_loss(&d.forward(&cond, &fake)?, &out, &target, weights)?.total)
    };

    let ld = loss_d(&g, &d)?;
    let grads_d = ld.backward()?;
    let lg = loss_g(&g, &d)?;
    let grads_g = lg.backward()?;

    let mut leak = 0f64;
    for v in g.params().vars() {
        for x in grad_values(&grads_d, v)? {
            leak = leak.max(x.abs());
        }
    }

    let numeric = |var: &Var, i: usize, f: &dyn Fn() -> Result<f64>| -> Result<f64> {
        let orig: Vec<f64> = var.as_tensor().flatten_all()?.to_vec1()?;
        let shape = var.as_tensor().shape().clone();
        let mut plus = orig.clone();
        plus[i] += h;
        var.set(&Tensor::from_vec(plus, shape.clone(), &dev)?)?;
        let fp = f()?;
        let mut minus = orig.clone();
        minus[i] -= h;
        var.set(&Tensor::from_vec(minus, shape.clone(), &dev)?)?;
        let fm = f()?;
        var.set(&Tensor::from_vec(orig, shape, &dev)?)?;
        Ok((fp - fm) / (2.0 * h))
    };

    let mut d_max = 0f64;
    let mut count = 0;
    for v in d.params().vars() {
        let analytic = grad_values(&grads_d, v)?;
        for (i, a) in analytic.iter().enumerate() {
            let n = numeric(v, i, &|| scalar(&loss_d(&g, &d)?))?;
            d_max = d_max.max(rel_err(*a, n));
            count += 1;
        }
    }
    let mut g_max = 0f64;
    for v in g.params().vars() {
        let analytic = grad_values(&grads_g, v)?;
        for (i, a) in analytic.iter().enumerate() {
            let n = numeric(v, i, &|| scalar(&loss_g(&g, &d)?))?;
            g_max = g_max.max(rel_err(*a, n));
            count += 1;
        }
    }
    Ok(GradCheckReport {
        parameters: count,
        d_max_rel_err: d_max,
        g_max_rel_err: g_max,
        d_loss_generator_leak: leak,
    })
}

fn random_tensor(
    rng: &mut ChaCha8Rng,
    shape: (usize, usize, usize, usize),
    lo: f64,
    hi: f64,
    dev: &Device,
) -> Result<Tensor> {
    use rand::Rng;
    let n = shape.0 * shape.1 * shape.2 * shape.3;
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    Ok(Tensor::from_vec(v, shape, dev)?)
}
