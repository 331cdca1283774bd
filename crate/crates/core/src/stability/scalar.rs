//! Background covariant derivatives of scalar fields in local node coordinates.

use crate::geometry::background::NodeGeometry;
use crate::geometry::jet::{i2, i3};
use crate::geometry::stencil::{node_derivs, SClosure};
use crate::geometry::{CollarChart, ScalarField};

/// Gradient and background Hessian `D_a D_b u` at a node.
pub struct ScalarJet {
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

pub fn scalar_jet(
    chart: &CollarChart,
    geo: &NodeGeometry,
    ix: usize,
    iy: usize,
    closure: SClosure,
    u: &ScalarField,
) -> ScalarJet {
    let d = chart.dim();
    let xn = chart.x(ix);
    let nd = node_derivs(chart, ix, iy, closure, |i, j| u.get(i, j));
    let mut grad = vec![0.0; d];
    let mut dd = vec![0.0; d * d];
    grad[0] = -nd.s;
    dd[0] = nd.ss + nd.s;
    if chart.ny > 1 {
        grad[1] = xn * nd.y;
        dd[i2(d, 0, 1)] = -xn * nd.sy;
        dd[i2(d, 1, 0)] = -xn * nd.sy;
        dd[i2(d, 1, 1)] = xn * xn * nd.yy;
    }
    let gam = &geo.conn.gamma;
    let mut hess = dd;
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += gam[i3(d, k, a, b)] * grad[k];
            }
            hess[i2(d, a, b)] -= s;
        }
    }
    ScalarJet { grad, hess }
}

/// `w^{ab} D_a D_b u`
pub fn contract(d: usize, w: &[f64], hess: &[f64]) -> f64 {
    (0..d * d).map(|k| w[k] * hess[k]).sum()
}

/// `w^{ab} p_a q_b`
pub fn pair(d: usize, w: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += w[i2(d, a, b)] * p[a] * q[b];
        }
    }
    s
}
