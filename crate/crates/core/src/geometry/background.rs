//! Closed-form background metrics and their per-node curvature cache.

use rayon::prelude::*;

use super::chart::{Anisotropy, CollarChart, Mode};
use super::jet::{self, i2, i4, Connection, Jet};
use super::stencil::{node_derivs, SClosure};
use super::tensor::{project_from, ZeroFrameTensor};
use crate::error::{FlowError, Result};

/// Background metric family, given by its 0-frame components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    /// Exact hyperbolic metric for the chart's mode.
    Hyperbolic,
    /// Tangential block scaled by `1 + beta x`; curvature error is O(x).
    TangentialRamp { beta: f64 },
    /// `hhat_{yy} = 1 + beta x sin(y)`; breaks y-translation invariance.
    TangentialWave { beta: f64 },
}

impl Background {
    pub fn name(&self) -> &'static str {
        match self {
            Background::Hyperbolic => "hyperbolic",
            Background::TangentialRamp { .. } => "tangential_ramp",
            Background::TangentialWave { .. } => "tangential_wave",
        }
    }

    /// Ansatz components of the background at `(x, y)`.
    pub fn frame_comps(&self, chart: &CollarChart, x: f64, y: f64) -> [f64; 4] {
        let base = match chart.mode {
            Mode::Torus => 1.0,
            Mode::Ball => (1.0 - 0.25 * x * x).powi(2),
        };
        let (tang, yy) = match *self {
            Background::Hyperbolic => (base, base),
            Background::TangentialRamp { beta } => (base * (1.0 + beta * x), base * (1.0 + beta * x)),
            Background::TangentialWave { beta } => (base, base * (1.0 + beta * x * y.sin())),
        };
        match chart.anisotropy {
            Anisotropy::Isotropic => [1.0, tang, 0.0, 0.0],
            Anisotropy::OneTangential => [1.0, 0.0, yy, tang],
        }
    }

    fn validate(&self, chart: &CollarChart) -> Result<()> {
        match *self {
            Background::Hyperbolic => Ok(()),
            Background::TangentialRamp { beta } | Background::TangentialWave { beta } => {
                if !beta.is_finite() {
                    return Err(FlowError::config("background beta must be finite"));
                }
                if matches!(self, Background::TangentialWave { .. })
                    && chart.anisotropy != Anisotropy::OneTangential
                {
                    return Err(FlowError::config(
                        "tangential_wave background requires anisotropy = one_tangential",
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Everything about the background needed by the flow at one node.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub h: Vec<f64>,
    pub jet: Jet,
    /// Connection of `h`; `conn.ginv` is `h^{-1}`.
    pub conn: Connection,
    pub riemann: Vec<f64>,
    /// `rup[j][a][p][b] = h^{pq} R_jaqb`
    pub rup: Vec<f64>,
    pub ricci: Vec<f64>,
    /// `E = -(Rc + n h)`; the flow right-hand side at `v = 0` is `2E`.
    pub einstein_defect: Vec<f64>,
    /// `|R + R^cc|_h`
    pub error_norm: f64,
}

impl NodeGeometry {
    #[inline]
    pub fn hinv(&self) -> &[f64] {
        &self.conn.ginv
    }
}

#[derive(Debug, Clone)]
pub struct BackgroundGeometry {
    chart: CollarChart,
    kind: Background,
    frame: ZeroFrameTensor,
    nodes: Vec<NodeGeometry>,
}

impl BackgroundGeometry {
    pub fn new(chart: CollarChart, kind: Background) -> Result<Self> {
        chart.validate()?;
        kind.validate(&chart)?;
        let frame = ZeroFrameTensor::from_fn(chart, |x, y| kind.frame_comps(&chart, x, y));
        let nodes = (0..chart.nodes())
            .into_par_iter()
            .map(|node| node_geometry(&chart, &frame, node))
            .collect::<Result<Vec<_>>>()?;
        Ok(BackgroundGeometry {
            chart,
            kind,
            frame,
            nodes,
        })
    }

    pub fn hyperbolic(chart: CollarChart) -> Result<Self> {
        Self::new(chart, Background::Hyperbolic)
    }

    #[inline]
    pub fn chart(&self) -> &CollarChart {
        &self.chart
    }

    pub fn kind(&self) -> Background {
        self.kind
    }

    /// Background 0-frame components.
    pub fn frame(&self) -> &ZeroFrameTensor {
        &self.frame
    }

    #[inline]
    pub fn node(&self, node: usize) -> &NodeGeometry {
        &self.nodes[node]
    }

    /// Measured `sup |R + R^cc|_h`.
    pub fn eta(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, g| m.max(g.error_norm))
    }

    /// `sup |R + R^cc|_h / x`.
    pub fn weighted_eta(&self) -> f64 {
        let c = &self.chart;
        (0..c.nodes()).fold(0.0, |m, node| {
            let (ix, _) = c.node_coords(node);
            m.max(self.nodes[node].error_norm / c.x(ix))
        })
    }

    /// `E` as an ansatz field.
    pub fn einstein_defect(&self) -> ZeroFrameTensor {
        let mut out = ZeroFrameTensor::zeros(self.chart);
        for node in 0..self.chart.nodes() {
            project_from(
                &self.chart,
                &self.nodes[node].einstein_defect,
                out.comps_mut(node),
            );
        }
        out
    }
}

fn node_geometry(chart: &CollarChart, frame: &ZeroFrameTensor, node: usize) -> Result<NodeGeometry> {
    let d = chart.dim();
    let (ix, iy) = chart.node_coords(node);
    let derivs: Vec<_> = (0..chart.ncomp())
        .map(|c| node_derivs(chart, ix, iy, SClosure::OneSided, |i, j| frame.get(i, j, c)))
        .collect();
    let jet = Jet::from_frame(chart, ix, &derivs);
    let h = jet.g.clone();
    let hinv = jet::invert(d, &h).ok_or_else(|| FlowError::SingularMetric {
        ix,
        iy,
        x: chart.x(ix),
        y: chart.y(iy),
        detail: "background metric is not invertible".into(),
    })?;
    let conn = jet::connection(&jet, hinv);
    let riemann = jet::riemann(&h, &conn, d);
    let ricci = jet::ricci(&conn.ginv, &riemann, d);
    let hinv = &conn.ginv;

    let mut rup = vec![0.0; d * d * d * d];
    for j in 0..d {
        for a in 0..d {
            for p in 0..d {
                for b in 0..d {
                    let mut s = 0.0;
                    for q in 0..d {
                        s += hinv[i2(d, p, q)] * riemann[i4(d, j, a, q, b)];
                    }
                    rup[i4(d, j, a, p, b)] = s;
                }
            }
        }
    }

    let n = chart.n as f64;
    let einstein_defect: Vec<f64> = ricci.iter().zip(&h).map(|(r, hh)| -(r + n * hh)).collect();

    let cc = jet::rcc(&h, d);
    let err: Vec<f64> = riemann.iter().zip(&cc).map(|(a, b)| a + b).collect();
    let error_norm = jet::norm4_sq(&err, hinv, d).max(0.0).sqrt();

    Ok(NodeGeometry {
        h,
        jet,
        conn,
        riemann,
        rup,
        ricci,
        einstein_defect,
        error_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_frame_is_identity() {
        let c = CollarChart::torus(3, 1e-3, 0.5, 32).unwrap();
        let bg = BackgroundGeometry::hyperbolic(c).unwrap();
        for node in 0..c.nodes() {
            let g = &bg.node(node).h;
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(g[i2(4, i, j)], if i == j { 1.0 } else { 0.0 });
                }
            }
        }
        assert!(bg.eta() < 1e-13);
        assert!(bg.einstein_defect().max_abs() < 1e-13);
    }

    #[test]
    fn ball_tangential_factor_at_unit_x() {
        let c = CollarChart::new(Mode::Ball, 3, 0.5, 1.5, 9, 1, Anisotropy::Isotropic).unwrap();
        let comps = Background::Hyperbolic.frame_comps(&c, 1.0, 0.0);
        assert_eq!(comps[1], 0.5625);
    }

    #[test]
    fn wave_background_needs_y() {
        let c = CollarChart::torus(3, 1e-3, 0.5, 32).unwrap();
        assert!(BackgroundGeometry::new(c, Background::TangentialWave { beta: 0.1 }).is_err());
    }
}
