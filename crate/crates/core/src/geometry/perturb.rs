//! Initial perturbation families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::background::BackgroundGeometry;
use super::chart::Anisotropy;
use super::jet;
use super::tensor::ZeroFrameTensor;

/// `v = w0 h`, i.e. `g = (1 + w0) h`.
pub fn conformal(bg: &BackgroundGeometry, w0: f64) -> ZeroFrameTensor {
    bg.frame().scaled(w0)
}

/// Compactly supported tangential bump `A (1 - r^2)^3`, `r = (s - s_c) / width`,
/// centred at `x = center` (`s_c = -ln center`). Only the tangential block of
/// `h` is perturbed, so the bump carries curvature.
pub fn bump(bg: &BackgroundGeometry, amplitude: f64, center: f64, width: f64) -> ZeroFrameTensor {
    let chart = *bg.chart();
    let sc = -center.ln();
    let mut v = ZeroFrameTensor::zeros(chart);
    for ix in 0..chart.nx {
        let r = (chart.s(ix) - sc) / width;
        let phi = if r.abs() < 1.0 {
            (1.0 - r * r).powi(3)
        } else {
            0.0
        };
        for iy in 0..chart.ny {
            let node = chart.node(ix, iy);
            let h = bg.frame().comps(node).to_vec();
            let out = v.comps_mut(node);
            match chart.anisotropy {
                Anisotropy::Isotropic => out[1] = amplitude * phi * h[1],
                Anisotropy::OneTangential => {
                    out[2] = amplitude * phi * h[2];
                    out[3] = amplitude * phi * h[3];
                }
            }
        }
    }
    v
}

/// Random smooth perturbation vanishing at both collar ends, scaled so that
/// `sup |v|_h = amplitude`. Each component is `(x - x_min)(x_max - x)` times a
/// random trigonometric polynomial of degree <= 3 in `y`; `ChaCha8Rng` seeded
/// with `seed` draws the coefficients.
pub fn random_smooth(bg: &BackgroundGeometry, amplitude: f64, seed: u64) -> ZeroFrameTensor {
    let chart = *bg.chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = chart.ncomp();
    let degree = if chart.ny > 1 { 3 } else { 0 };
    // coef[c][k] = (cos, sin)
    let coef: Vec<Vec<(f64, f64)>> = (0..nc)
        .map(|_| {
            (0..=degree)
                .map(|k| {
                    let w = 1.0 / ((k * k).max(1) as f64);
                    (w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0))
                })
                .collect()
        })
        .collect();
    let (xa, xb) = (chart.x_min(), chart.x_max());
    let mut v = ZeroFrameTensor::from_fn(chart, |x, y| {
        let prof = (x - xa) * (xb - x);
        let mut out = [0.0; 4];
        for (c, cc) in coef.iter().enumerate() {
            let mut s = cc[0].0;
            for (k, &(a, b)) in cc.iter().enumerate().skip(1) {
                s += a * (k as f64 * y).cos() + b * (k as f64 * y).sin();
            }
            out[c] = prof * s;
        }
        out
    });
    v.zero_s_ends();
    let d = chart.dim();
    let sup = (0..chart.nodes()).fold(0.0_f64, |m, node| {
        m.max(jet::norm2_sq(&v.matrix_at(node), bg.node(node).hinv(), d).sqrt())
    });
    if sup > 0.0 {
        v = v.scaled(amplitude / sup);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::{CollarChart, Mode};

    #[test]
    fn random_smooth_is_normalized_and_deterministic() {
        let c = CollarChart::new(Mode::Torus, 3, 1e-3, 0.5, 24, 8, Anisotropy::OneTangential).unwrap();
        let bg = BackgroundGeometry::hyperbolic(c).unwrap();
        let a = random_smooth(&bg, 0.01, 7);
        let b = random_smooth(&bg, 0.01, 7);
        assert_eq!(a, b);
        let sup = (0..c.nodes()).fold(0.0_f64, |m, node| {
            m.max(jet::norm2_sq(&a.matrix_at(node), bg.node(node).hinv(), 4).sqrt())
        });
        assert!((sup - 0.01).abs() < 1e-15);
        assert_ne!(a, random_smooth(&bg, 0.01, 8));
        for iy in 0..c.ny {
            for k in 0..4 {
                assert_eq!(a.get(0, iy, k), 0.0);
                assert_eq!(a.get(c.nx - 1, iy, k), 0.0);
            }
        }
    }
}
