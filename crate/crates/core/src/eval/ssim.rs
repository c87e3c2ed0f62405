//! Windowed structural similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    /// Side of the square window, moved with stride 1.
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 8,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
        }
    }
}

impl SsimConfig {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

/// Single-channel plane used for scoring: luma for colour images, the
/// channel itself for grayscale.
fn plane(img: &Image) -> Result<Vec<f64>> {
    match img.channels() {
        1 => Ok(img.data().iter().map(|&v| v as f64).collect()),
        3 => Ok(img.luma()),
        c => Err(Error::Shape(format!("cannot score a {c}-channel image"))),
    }
}

/// Sums over every `k`-wide horizontal run, then every `k`-tall vertical
/// run of those: one value per window position.
fn window_sums(v: &[f64], h: usize, w: usize, k: usize) -> Vec<f64> {
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut rows = vec![0f64; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = v[y * w + x..y * w + x + k].iter().sum();
        }
    }
    let mut out = vec![0f64; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..k).map(|d| rows[(y + d) * ow + x]).sum();
        }
    }
    out
}

/// Per-window SSIM values in row-major order.
pub fn ssim_map(a: &Image, b: &Image, config: SsimConfig) -> Result<Vec<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "ssim inputs differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (h, w) = (a.height(), a.width());
    let k = config.window;
    if k < 2 || h < k || w < k {
        return Err(Error::Shape(format!("a {k}x{k} window does not fit a {h}x{w} image")));
    }
    let (x, y) = (plane(a)?, plane(b)?);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let (sx, sy) = (window_sums(&x, h, w, k), window_sums(&y, h, w, k));
    let (sxx, syy, sxy) = (
        window_sums(&xx, h, w, k),
        window_sums(&yy, h, w, k),
        window_sums(&xy, h, w, k),
    );
    let n = (k * k) as f64;
    let (c1, c2) = (config.c1(), config.c2());
    Ok((0..sx.len())
        .map(|i| {
            let (mx, my) = (sx[i] / n, sy[i] / n);
            // Sample (n - 1) normalization.
            let vx = (sxx[i] - sx[i] * mx) / (n - 1.0);
            let vy = (syy[i] - sy[i] * my) / (n - 1.0);
            let cxy = (sxy[i] - sx[i] * my) / (n - 1.0);
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .collect())
}

/// Mean SSIM over all window positions.
pub fn ssim(a: &Image, b: &Image, config: SsimConfig) -> Result<f64> {
    let m = ssim_map(a, b, config)?;
    Ok(m.iter().sum::<f64>() / m.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct two-pass formula on one window.
    fn oracle(x: &[f64], y: &[f64], c1: f64, c2: f64) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let vx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / (n - 1.0);
        let vy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / (n - 1.0);
        let cxy = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
        let l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
        let cs = (2.0 * cxy + c2) / (vx + vy + c2);
        l * cs
    }

    #[test]
    fn matches_direct_formula_on_single_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cfg = SsimConfig::default();
        for _ in 0..50 {
            let a: Vec<f32> = (0..64).map(|_| rng.random_range(0.0..255.0)).collect();
            let b: Vec<f32> = (0..64).map(|_| rng.random_range(0.0..255.0)).collect();
            let ia = Image::from_vec(1, 8, 8, a.clone()).unwrap();
            let ib = Image::from_vec(1, 8, 8, b.clone()).unwrap();
            let x: Vec<f64> = a.iter().map(|&v| v as f64).collect();
            let y: Vec<f64> = b.iter().map(|&v| v as f64).collect();
            let got = ssim(&ia, &ib, cfg).unwrap();
            assert!((got - oracle(&x, &y, cfg.c1(), cfg.c2())).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_images_closed_form() {
        let cfg = SsimConfig::default();
        let a = Image::new(1, 16, 16);
        let b = Image::filled(1, 16, 16, 255.0);
        let expect = cfg.c1() / (255.0 * 255.0 + cfg.c1());
        assert!((ssim(&a, &b, cfg).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn rgb_uses_luma_and_shapes_must_match() {
        let a = Image::solid_rgb(8, 8, [10.0, 20.0, 30.0]);
        assert!((ssim(&a, &a, SsimConfig::default()).unwrap() - 1.0).abs() < 1e-12);
        assert!(ssim(&a, &Image::new(3, 8, 9), SsimConfig::default()).is_err());
        assert!(ssim(&Image::new(1, 4, 4), &Image::new(1, 4, 4), SsimConfig::default()).is_err());
    }

    fn arb_image(h: usize, w: usize) -> impl Strategy<Value = Image> {
        proptest::collection::vec(0.0f32..=255.0, h * w).prop_map(move |d| Image::from_vec(1, h, w, d).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn self_similarity_symmetry_and_bounds(a in arb_image(12, 14), b in arb_image(12, 14)) {
            let cfg = SsimConfig::default();
            prop_assert!((ssim(&a, &a, cfg).unwrap() - 1.0).abs() < 1e-6);
            let ab = ssim(&a, &b, cfg).unwrap();
            let ba = ssim(&b, &a, cfg).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn interior_translation_invariance(a in arb_image(20, 20), b in arb_image(20, 20), dx in 0usize..4, dy in 0usize..4) {
            // Shifting both images by (dx, dy) moves every interior window with them.
            let cfg = SsimConfig::default();
            let crop = |img: &Image, ox: usize, oy: usize| {
                let mut out = Image::new(1, 16, 16);
                for y in 0..16 { for x in 0..16 { out.set(0, y, x, img.get(0, y + oy, x + ox)); } }
                out
            };
            let base = ssim_map(&crop(&a, 0, 0), &crop(&b, 0, 0), cfg).unwrap();
            let full = ssim_map(&a, &b, cfg).unwrap();
            // Window (x, y) of the 16x16 crop is window (x, y) of the full map; shifted crops
            // pick out window (x + dx, y + dy).
            let shifted = ssim_map(&crop(&a, dx, dy), &crop(&b, dx, dy), cfg).unwrap();
            for y in 0..9 { for x in 0..9 {
                prop_assert!((base[y * 9 + x] - full[y * 13 + x]).abs() < 1e-9);
                prop_assert!((shifted[y * 9 + x] - full[(y + dy) * 13 + x + dx]).abs() < 1e-9);
            }}
        }
    }
}
