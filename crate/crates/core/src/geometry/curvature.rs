//! Curvature of the evolving metric `g = h + v` at every node.

use rayon::prelude::*;

use super::chart::CollarChart;
use super::jet::{self, i2};
use super::state::MetricState;
use super::stencil::SClosure;
use crate::error::Result;

/// Per-node curvature data in local coordinates (equal to 0-frame components
/// at the node). Arrays are node-major with strides `dim^3` / `dim^4` / `dim^2`.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub chart: CollarChart,
    pub christoffel: Vec<f64>,
    pub riemann: Option<Vec<f64>>,
    pub ricci: Option<Vec<f64>>,
    /// `E = R + R^cc` with `R^cc` built from `g`.
    pub error: Option<Vec<f64>>,
    /// `|E|_g` per node.
    pub error_norm: Option<Vec<f64>>,
}

impl CurvatureBundle {
    fn d(&self) -> usize {
        self.chart.dim()
    }

    pub fn christoffel_at(&self, node: usize) -> &[f64] {
        let s = self.d().pow(3);
        &self.christoffel[node * s..(node + 1) * s]
    }

    pub fn riemann_at(&self, node: usize) -> Option<&[f64]> {
        let s = self.d().pow(4);
        self.riemann.as_ref().map(|r| &r[node * s..(node + 1) * s])
    }

    pub fn ricci_at(&self, node: usize) -> Option<&[f64]> {
        let s = self.d().pow(2);
        self.ricci.as_ref().map(|r| &r[node * s..(node + 1) * s])
    }

    pub fn error_at(&self, node: usize) -> Option<&[f64]> {
        let s = self.d().pow(4);
        self.error.as_ref().map(|r| &r[node * s..(node + 1) * s])
    }

    /// `sup |E|`
    pub fn error_sup(&self) -> Option<f64> {
        self.error_norm
            .as_ref()
            .map(|e| e.iter().fold(0.0, |m: f64, v| m.max(*v)))
    }

    /// `sup |E| / x`
    pub fn weighted_error_sup(&self) -> Option<f64> {
        let c = &self.chart;
        self.error_norm.as_ref().map(|e| {
            e.iter().enumerate().fold(0.0, |m: f64, (node, v)| {
                m.max(v / c.x(c.node_coords(node).0))
            })
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Depth {
    Connection,
    Curvature,
    Error,
}

struct NodeCurv {
    gamma: Vec<f64>,
    riemann: Vec<f64>,
    ricci: Vec<f64>,
    error: Vec<f64>,
    error_norm: f64,
}

fn compute(g: &MetricState, depth: Depth) -> Result<CurvatureBundle> {
    let chart = *g.chart();
    let d = chart.dim();
    let per_node = (0..chart.nodes())
        .into_par_iter()
        .map(|node| {
            let jet = g.g_jet(node, SClosure::OneSided);
            let ginv = g.g_inverse(node, &jet.g)?;
            let conn = jet::connection(&jet, ginv);
            let mut out = NodeCurv {
                gamma: Vec::new(),
                riemann: Vec::new(),
                ricci: Vec::new(),
                error: Vec::new(),
                error_norm: 0.0,
            };
            if depth != Depth::Connection {
                out.riemann = jet::riemann(&jet.g, &conn, d);
                out.ricci = jet::ricci(&conn.ginv, &out.riemann, d);
            }
            if depth == Depth::Error {
                let cc = jet::rcc(&jet.g, d);
                out.error = out.riemann.iter().zip(&cc).map(|(a, b)| a + b).collect();
                out.error_norm = jet::norm4_sq(&out.error, &conn.ginv, d).max(0.0).sqrt();
            }
            out.gamma = conn.gamma;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let flat = |f: fn(&NodeCurv) -> &Vec<f64>| per_node.iter().flat_map(|n| f(n).iter().copied()).collect();
    Ok(CurvatureBundle {
        chart,
        christoffel: flat(|n| &n.gamma),
        riemann: (depth != Depth::Connection).then(|| flat(|n| &n.riemann)),
        ricci: (depth != Depth::Connection).then(|| flat(|n| &n.ricci)),
        error: (depth == Depth::Error).then(|| flat(|n| &n.error)),
        error_norm: (depth == Depth::Error).then(|| per_node.iter().map(|n| n.error_norm).collect()),
    })
}

/// Christoffel symbols of `g` only.
pub fn christoffel(g: &MetricState) -> Result<CurvatureBundle> {
    compute(g, Depth::Connection)
}

/// Christoffels, Riemann (index lowered into the fourth slot) and Ricci.
pub fn riemann_ricci(g: &MetricState) -> Result<CurvatureBundle> {
    compute(g, Depth::Curvature)
}

/// Full bundle including `E = R + R^cc` and `|E|_g`.
pub fn curvature_error(g: &MetricState) -> Result<CurvatureBundle> {
    compute(g, Depth::Error)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub eta: f64,
    pub sup_error: f64,
    pub pass: bool,
}

/// Passes iff `sup |R + R^cc| <= eta`.
pub fn admissibility_check(g: &MetricState, eta: f64) -> Result<AdmissibilityReport> {
    let sup_error = curvature_error(g)?.error_sup().unwrap_or(0.0);
    Ok(AdmissibilityReport {
        eta,
        sup_error,
        pass: sup_error <= eta,
    })
}

/// Largest relative defect of the algebraic Riemann symmetries at any node.
pub fn riemann_symmetry_defect(b: &CurvatureBundle) -> f64 {
    let d = b.chart.dim();
    let mut worst: f64 = 0.0;
    for node in 0..b.chart.nodes() {
        let Some(r) = b.riemann_at(node) else {
            return f64::NAN;
        };
        let scale = r.iter().fold(1e-300_f64, |m, v| m.max(v.abs()));
        let at = |i, j, k, l| r[jet::i4(d, i, j, k, l)];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let x = at(i, j, k, l);
                        worst = worst
                            .max((x + at(j, i, k, l)).abs() / scale)
                            .max((x + at(i, j, l, k)).abs() / scale)
                            .max((x - at(k, l, i, j)).abs() / scale);
                    }
                }
            }
        }
    }
    worst
}

/// Largest relative asymmetry `Gamma^k_ij - Gamma^k_ji`.
pub fn christoffel_symmetry_defect(b: &CurvatureBundle) -> f64 {
    let d = b.chart.dim();
    let mut worst: f64 = 0.0;
    for node in 0..b.chart.nodes() {
        let g = b.christoffel_at(node);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((g[jet::i3(d, k, i, j)] - g[jet::i3(d, k, j, i)]).abs());
                }
            }
        }
    }
    worst
}

/// Ricci as a symmetric matrix at `node`, convenient for tests.
pub fn ricci_matrix(b: &CurvatureBundle, node: usize) -> Option<Vec<Vec<f64>>> {
    let d = b.chart.dim();
    b.ricci_at(node)
        .map(|r| (0..d).map(|i| (0..d).map(|j| r[i2(d, i, j)]).collect()).collect())
}
