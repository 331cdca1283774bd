use std::f64::consts::TAU;

use crate::geometry::CollarChart;

/// Ratio between the centres of adjacent layers.
pub const LAYER_RATIO: f64 = 4.0 / 3.0;
/// Largest tangential centre spacing, in units of the layer's `x`.
const Y_SPACING: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitneyBall {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub layer: usize,
}

#[derive(Debug, Clone)]
pub struct WhitneyCover {
    pub balls: Vec<WhitneyBall>,
    pub layers: usize,
    /// Node indices inside each ball.
    pub members: Vec<Vec<usize>>,
    /// Largest number of balls containing a single node.
    pub multiplicity: usize,
    /// Nodes contained in no ball (empty for a valid cover).
    pub uncovered: Vec<usize>,
}

/// Periodic distance on `[0, 2 pi)`.
pub fn y_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Layered cover: centres `x_k = x_min (4/3)^k` with radius `x_k / 2`, and
/// tangential centres spaced by at most `0.7 x_k` (or one per grid column when
/// that is finer than the grid). For `Ny = 1` fields do not depend on `y` and
/// each layer has a single ball.
pub fn whitney_cover(chart: &CollarChart) -> WhitneyCover {
    let (xa, xb) = (chart.x_min(), chart.x_max());
    let layers = ((xb / xa).ln() / LAYER_RATIO.ln()).ceil().max(1.0) as usize;
    let mut balls = Vec::new();
    for k in 0..layers {
        let x = xa * LAYER_RATIO.powi(k as i32);
        let radius = 0.5 * x;
        if chart.ny == 1 {
            balls.push(WhitneyBall { x, y: 0.0, radius, layer: k });
            continue;
        }
        let count = (TAU / (Y_SPACING * x)).ceil() as usize;
        let ys: Vec<f64> = if TAU / count as f64 <= chart.dy() {
            (0..chart.ny).map(|iy| chart.y(iy)).collect()
        } else {
            (0..count).map(|j| j as f64 * TAU / count as f64).collect()
        };
        for y in ys {
            balls.push(WhitneyBall { x, y, radius, layer: k });
        }
    }

    let mut members = vec![Vec::new(); balls.len()];
    let mut hits = vec![0usize; chart.nodes()];
    for (b, ball) in balls.iter().enumerate() {
        for ix in 0..chart.nx {
            let dx = chart.x(ix) - ball.x;
            if dx.abs() > ball.radius {
                continue;
            }
            for iy in 0..chart.ny {
                let dy = if chart.ny == 1 {
                    0.0
                } else {
                    y_distance(chart.y(iy), ball.y)
                };
                if dx * dx + dy * dy <= ball.radius * ball.radius {
                    let node = chart.node(ix, iy);
                    members[b].push(node);
                    hits[node] += 1;
                }
            }
        }
    }
    let uncovered = (0..chart.nodes()).filter(|&n| hits[n] == 0).collect();
    WhitneyCover {
        balls,
        layers,
        members,
        multiplicity: hits.into_iter().max().unwrap_or(0),
        uncovered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Anisotropy, Mode};

    #[test]
    fn five_layers_on_a_quarter_decade() {
        let c = CollarChart::torus(3, 0.1, 0.4, 64).unwrap();
        let w = whitney_cover(&c);
        assert_eq!(w.layers, 5);
        assert!(w.uncovered.is_empty());
        for b in &w.balls {
            assert_eq!(b.radius, 0.5 * b.x);
        }
    }

    #[test]
    fn covers_two_dimensional_grids() {
        for ny in [8, 16, 64] {
            let c = CollarChart::new(Mode::Torus, 3, 1e-3, 0.5, 96, ny, Anisotropy::OneTangential).unwrap();
            let w = whitney_cover(&c);
            assert!(w.uncovered.is_empty(), "ny={ny}");
            assert!(w.multiplicity <= 12, "multiplicity {}", w.multiplicity);
        }
    }
}
