use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::background::{Background, BackgroundGeometry};
use super::chart::{Anisotropy, CollarChart};
use super::jet::{self, Jet};
use super::stencil::{node_derivs, NodeDerivs, SClosure};
use super::tensor::ZeroFrameTensor;
use crate::error::{FlowError, Result};

/// Background `h`, perturbation `v` and flow time; the evolving metric is `g = h + v`.
#[derive(Debug, Clone)]
pub struct MetricState {
    pub bg: Arc<BackgroundGeometry>,
    pub v: ZeroFrameTensor,
    pub t: f64,
}

/// Hyperbolic background for the chart's mode with `v = 0`, `t = 0`.
pub fn build_background(chart: CollarChart) -> Result<MetricState> {
    build_background_with(chart, Background::Hyperbolic)
}

pub fn build_background_with(chart: CollarChart, kind: Background) -> Result<MetricState> {
    let bg = Arc::new(BackgroundGeometry::new(chart, kind)?);
    Ok(MetricState::unperturbed(bg))
}

impl MetricState {
    pub fn unperturbed(bg: Arc<BackgroundGeometry>) -> Self {
        let v = ZeroFrameTensor::zeros(*bg.chart());
        MetricState { bg, v, t: 0.0 }
    }

    pub fn with_perturbation(&self, v: ZeroFrameTensor) -> Self {
        assert_eq!(v.chart(), self.chart());
        MetricState {
            bg: self.bg.clone(),
            v,
            t: self.t,
        }
    }

    #[inline]
    pub fn chart(&self) -> &CollarChart {
        self.bg.chart()
    }

    /// Ansatz components of `g = h + v` at a node.
    pub fn g_comps(&self, node: usize) -> Vec<f64> {
        self.bg
            .frame()
            .comps(node)
            .iter()
            .zip(self.v.comps(node))
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Derivatives of each perturbation component at a node.
    pub fn v_derivs(&self, ix: usize, iy: usize, closure: SClosure) -> Vec<NodeDerivs> {
        perturbation_derivs(&self.v, ix, iy, closure)
    }

    /// Local-coordinate jet of `g` at a node.
    pub fn g_jet(&self, node: usize, closure: SClosure) -> Jet {
        let c = self.chart();
        let (ix, iy) = c.node_coords(node);
        let vj = Jet::from_frame(c, ix, &self.v_derivs(ix, iy, closure));
        self.bg.node(node).jet.add(&vj)
    }

    /// Inverse of `g` at a node, or a singular-metric error naming it.
    pub fn g_inverse(&self, node: usize, g: &[f64]) -> Result<Vec<f64>> {
        let c = self.chart();
        let (ix, iy) = c.node_coords(node);
        jet::invert(c.dim(), g).ok_or_else(|| FlowError::SingularMetric {
            ix,
            iy,
            x: c.x(ix),
            y: c.y(iy),
            detail: "g = h + v is not invertible".into(),
        })
    }

    /// Smallest eigenvalue of the 0-frame matrix of `g` and the node attaining it.
    pub fn min_eigenvalue(&self) -> (f64, usize) {
        let c = self.chart();
        (0..c.nodes())
            .map(|node| (ansatz_min_eig(c, &self.g_comps(node)), node))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    pub fn check_positive(&self) -> Result<()> {
        if !self.v.is_finite() {
            return Err(FlowError::PositivityLost {
                t: self.t,
                ix: 0,
                iy: 0,
                min_eig: f64::NAN,
            });
        }
        let (min_eig, node) = self.min_eigenvalue();
        if min_eig > 0.0 {
            Ok(())
        } else {
            let (ix, iy) = self.chart().node_coords(node);
            Err(FlowError::PositivityLost {
                t: self.t,
                ix,
                iy,
                min_eig,
            })
        }
    }

    /// `sup` over nodes of the operator norm of `v` relative to `h`.
    pub fn closeness(&self) -> f64 {
        let c = self.chart();
        let d = c.dim();
        let mut worst: f64 = 0.0;
        for node in 0..c.nodes() {
            let h = DMatrix::from_row_slice(d, d, &self.bg.node(node).h);
            let v = DMatrix::from_row_slice(d, d, &self.v.matrix_at(node));
            let Some(chol) = h.cholesky() else {
                return f64::INFINITY;
            };
            let l = chol.l();
            let Some(linv) = l.try_inverse() else {
                return f64::INFINITY;
            };
            let m = &linv * v * linv.transpose();
            let m = (&m + m.transpose()) * 0.5;
            let eig = SymmetricEigen::new(m);
            worst = eig.eigenvalues.iter().fold(worst, |w, e| w.max(e.abs()));
        }
        worst
    }

    /// `|v|_h` at a node.
    pub fn v_norm_at(&self, node: usize) -> f64 {
        let d = self.chart().dim();
        jet::norm2_sq(&self.v.matrix_at(node), self.bg.node(node).hinv(), d)
            .max(0.0)
            .sqrt()
    }

    /// `sup |Z|_h` with `Z = g - h = v`.
    pub fn sup_z(&self) -> f64 {
        (0..self.chart().nodes()).fold(0.0, |m, node| m.max(self.v_norm_at(node)))
    }
}

pub fn perturbation_derivs(
    v: &ZeroFrameTensor,
    ix: usize,
    iy: usize,
    closure: SClosure,
) -> Vec<NodeDerivs> {
    let c = v.chart();
    (0..c.ncomp())
        .map(|k| node_derivs(c, ix, iy, closure, |i, j| v.get(i, j, k)))
        .collect()
}

/// Smallest eigenvalue of the expanded ansatz matrix.
pub fn ansatz_min_eig(chart: &CollarChart, comps: &[f64]) -> f64 {
    match chart.anisotropy {
        Anisotropy::Isotropic => comps[0].min(comps[1]),
        Anisotropy::OneTangential => {
            let (a, b, d) = (comps[0], comps[1], comps[2]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            (mean - rad).min(comps[3])
        }
    }
}
