//! 0-derivatives `x d_x`, `x d_y` and b-derivatives `d_y^l` of grid functions.

use crate::error::{FlowError, Result};
use crate::geometry::stencil::{node_derivs, y_derivative_at, y_derivative_weights, SClosure};
use crate::geometry::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroDirection {
    /// `x d_x = -d_s`
    Normal,
    /// `x d_y`
    Tangential,
}

pub fn zero_derivative(u: &ScalarField, which: ZeroDirection) -> ScalarField {
    let c = *u.chart();
    let mut out = ScalarField::zeros(c);
    for ix in 0..c.nx {
        let x = c.x(ix);
        for iy in 0..c.ny {
            let d = node_derivs(&c, ix, iy, SClosure::OneSided, |i, j| u.get(i, j));
            out.data_mut()[c.node(ix, iy)] = match which {
                ZeroDirection::Normal => -d.s,
                ZeroDirection::Tangential => x * d.y,
            };
        }
    }
    out
}

/// `d_y^order u` with periodic centred stencils; orders above 4 are unsupported.
pub fn b_derivative(u: &ScalarField, order: usize) -> Result<ScalarField> {
    let c = *u.chart();
    if c.ny == 1 {
        return Err(FlowError::Precondition(
            "b-derivatives need a tangential grid (one_tangential mode)".into(),
        ));
    }
    if order == 0 {
        return Ok(u.clone());
    }
    let w = y_derivative_weights(order).ok_or_else(|| {
        FlowError::Unsupported(format!("b-derivative of order {order} (max 4)"))
    })?;
    let mut out = ScalarField::zeros(c);
    for ix in 0..c.nx {
        for iy in 0..c.ny {
            out.data_mut()[c.node(ix, iy)] = y_derivative_at(&c, ix, iy, w, order, |i, j| u.get(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Anisotropy, CollarChart, Mode};

    fn chart(nx: usize, ny: usize) -> CollarChart {
        CollarChart::new(Mode::Torus, 3, 0.01, 0.5, nx, ny, Anisotropy::OneTangential).unwrap()
    }

    #[test]
    fn normal_derivative_of_x_converges() {
        let err = |nx| {
            let c = chart(nx, 8);
            let u = ScalarField::from_fn(c, |x, _| x);
            let d = zero_derivative(&u, ZeroDirection::Normal);
            (0..c.nodes()).fold(0.0_f64, |m, k| m.max((d.data()[k] - u.data()[k]).abs()))
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e1 / e2 > 3.3, "{e1} {e2}");
    }

    #[test]
    fn tangential_derivatives() {
        let c = chart(16, 64);
        let u = ScalarField::from_fn(c, |_, y| y.sin());
        let d2 = b_derivative(&u, 2).unwrap();
        let xu = ScalarField::from_fn(c, |x, y| x * y.sin());
        let zd = zero_derivative(&xu, ZeroDirection::Tangential);
        let bd = b_derivative(&xu, 1).unwrap();
        for ix in 0..c.nx {
            for iy in 0..c.ny {
                let k = c.node(ix, iy);
                assert!((d2.data()[k] + u.data()[k]).abs() < 2e-3);
                assert!((zd.data()[k] - c.x(ix) * bd.data()[k]).abs() < 1e-15);
            }
        }
        let flat = ScalarField::from_fn(c, |x, _| x * x);
        assert!(b_derivative(&flat, 3).unwrap().data().iter().all(|v| *v == 0.0));
        assert!(matches!(b_derivative(&u, 5), Err(FlowError::Unsupported(_))));
    }
}
