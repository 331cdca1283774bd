//! Bottom of the Dirichlet spectrum of `-Delta_h` on scalar functions.

use crate::error::{FlowError, Result};
use crate::flow::linsolve::BlockTridiag;
use crate::geometry::stencil::SClosure;
use crate::geometry::{BackgroundGeometry, ScalarField};

use super::scalar::{contract, scalar_jet};

pub const LAMBDA0_MAX_ITER: usize = 2000;
const LAMBDA0_TOL: f64 = 1e-11;

/// `-Delta_h u` for `u` vanishing on both `s`-ends; input and output are the
/// interior layers `1..nx-1`.
pub fn neg_laplacian(bg: &BackgroundGeometry, interior: &[f64]) -> Vec<f64> {
    let c = *bg.chart();
    let d = c.dim();
    let mut u = ScalarField::zeros(c);
    u.data_mut()[c.ny..c.ny * (c.nx - 1)].copy_from_slice(interior);
    let mut out = Vec::with_capacity(interior.len());
    for ix in 1..c.nx - 1 {
        for iy in 0..c.ny {
            let geo = bg.node(c.node(ix, iy));
            let j = scalar_jet(&c, geo, ix, iy, SClosure::OneSided, &u);
            out.push(-contract(d, geo.hinv(), &j.hess));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda0 {
    pub value: f64,
    pub iterations: usize,
}

/// Inverse iteration on the assembled Dirichlet operator from the constant
/// start vector.
pub fn lambda0_estimate(bg: &BackgroundGeometry) -> Result<Lambda0> {
    let c = *bg.chart();
    if c.nx < 3 {
        return Err(FlowError::Precondition("need at least one interior layer".into()));
    }
    let a = BlockTridiag::probe(c.nx - 2, c.ny, 1, |x| neg_laplacian(bg, x));
    let solver = a.factor_shifted(0.0, 1.0)?;
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut x = vec![1.0; (c.nx - 2) * c.ny];
    let n0 = norm(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let mut prev = f64::NAN;
    for it in 1..=LAMBDA0_MAX_ITER {
        let y = solver.solve(&x)?;
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let lambda = 1.0 / xy;
        let ny = norm(&y);
        x = y.into_iter().map(|v| v / ny).collect();
        if (lambda - prev).abs() <= LAMBDA0_TOL * lambda.abs() {
            return Ok(Lambda0 { value: lambda, iterations: it });
        }
        prev = lambda;
    }
    Err(FlowError::NoConvergence { iterations: LAMBDA0_MAX_ITER })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CollarChart;

    #[test]
    fn hyperbolic_collar_value() {
        // -(u'' + n u') on an s-interval of length L: n^2/4 + (pi/L)^2
        let c = CollarChart::torus(3, 1e-3, 0.5, 256).unwrap();
        let bg = BackgroundGeometry::hyperbolic(c).unwrap();
        let l = lambda0_estimate(&bg).unwrap().value;
        let len = (0.5_f64 / 1e-3).ln();
        let exact = 2.25 + (std::f64::consts::PI / len).powi(2);
        assert!((l - exact).abs() < 1e-3 * exact, "{l} vs {exact}");
    }

    #[test]
    fn shrinking_the_domain_raises_the_bottom() {
        let l = |xmin: f64| {
            let c = CollarChart::torus(3, xmin, 0.5, 128).unwrap();
            lambda0_estimate(&BackgroundGeometry::hyperbolic(c).unwrap()).unwrap().value
        };
        assert!(l(1e-2) >= l(1e-3));
    }
}
