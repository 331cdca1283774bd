//! `L^2` energy `F = int |Z|_h^2 dvol_h` over the collar.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::geometry::{jet, BackgroundGeometry, MetricState, Mode};

/// Volume of the round unit `n`-sphere.
pub fn sphere_volume(n: usize) -> f64 {
    // |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2), via the recursion |S^n| = 2 pi |S^{n-2}| / (n-1)
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI * sphere_volume(n - 2) / (n - 1) as f64,
    }
}

/// Tangential measure multiplying the `s` (and `y^1`) quadrature.
fn tangential_factor(bg: &BackgroundGeometry) -> f64 {
    let c = bg.chart();
    match c.mode {
        Mode::Ball => sphere_volume(c.n),
        Mode::Torus if c.ny > 1 => (2.0 * PI).powi(c.n as i32 - 1),
        Mode::Torus => (2.0 * PI).powi(c.n as i32),
    }
}

/// `x^{-n} sqrt(det H)` at every node: the density of `dvol_h` in `(s, y)`.
pub fn volume_density(bg: &BackgroundGeometry) -> Vec<f64> {
    let c = bg.chart();
    let d = c.dim();
    (0..c.nodes())
        .map(|node| {
            let (ix, _) = c.node_coords(node);
            let det = DMatrix::from_row_slice(d, d, &bg.node(node).h).determinant();
            c.x(ix).powi(-(c.n as i32)) * det.max(0.0).sqrt()
        })
        .collect()
}

/// Trapezoid in `s`, periodic rectangle rule in `y`, of a nodal integrand.
pub fn integrate(bg: &BackgroundGeometry, integrand: &[f64]) -> f64 {
    let c = bg.chart();
    let dens = volume_density(bg);
    let wy = if c.ny > 1 { c.dy() } else { 1.0 };
    let mut total = 0.0;
    for ix in 0..c.nx {
        let ws = if ix == 0 || ix == c.nx - 1 { 0.5 } else { 1.0 } * c.ds();
        for iy in 0..c.ny {
            let node = c.node(ix, iy);
            total += ws * wy * dens[node] * integrand[node];
        }
    }
    tangential_factor(bg) * total
}

/// `Vol_h` of the collar with the same quadrature as [`energy`].
pub fn volume(bg: &BackgroundGeometry) -> f64 {
    integrate(bg, &vec![1.0; bg.chart().nodes()])
}

/// `|Z|_h^2` at every node.
pub fn z_norm_sq(g: &MetricState) -> Vec<f64> {
    let c = g.chart();
    let d = c.dim();
    (0..c.nodes())
        .map(|node| jet::norm2_sq(&g.v.matrix_at(node), g.bg.node(node).hinv(), d))
        .collect()
}

pub fn energy(g: &MetricState) -> f64 {
    integrate(&g.bg, &z_norm_sq(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_background, perturb, CollarChart};

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_has_no_energy() {
        let g = build_background(CollarChart::torus(3, 1e-3, 0.5, 32).unwrap()).unwrap();
        assert_eq!(energy(&g), 0.0);
    }

    #[test]
    fn conformal_energy_is_integrand_times_volume() {
        let g = build_background(CollarChart::torus(3, 1e-3, 0.5, 64).unwrap()).unwrap();
        let c2 = 1.3;
        let g = g.with_perturbation(perturb::conformal(&g.bg, c2 - 1.0));
        let expect = 4.0 * (c2 - 1.0_f64).powi(2) * volume(&g.bg);
        assert!((energy(&g) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn collar_volume_matches_closed_form() {
        // Vol = (2 pi)^3 int_{x_a}^{x_b} x^{-4} dx on the hyperbolic torus collar
        let (xa, xb) = (0.05_f64, 0.5_f64);
        let exact = (2.0 * PI).powi(3) * (xa.powi(-3) - xb.powi(-3)) / 3.0;
        let err = |nx| {
            let g = build_background(CollarChart::torus(3, xa, xb, nx).unwrap()).unwrap();
            (volume(&g.bg) - exact).abs() / exact
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < 1e-3 && e1 / e2 > 3.5, "{e1} {e2}");
    }
}
