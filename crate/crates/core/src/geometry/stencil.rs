//! Second-order finite-difference stencils on the `(s, y)` grid.

use super::chart::CollarChart;

/// Treatment of the two `s`-ends when differentiating a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SClosure {
    /// Second-order one-sided stencils.
    OneSided,
    /// Even reflection across the end node (zero normal derivative).
    Mirror,
}

/// Value and first/second `(s, y)` derivatives of a grid function at a node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeDerivs {
    pub v: f64,
    pub s: f64,
    pub y: f64,
    pub ss: f64,
    pub sy: f64,
    pub yy: f64,
}

impl NodeDerivs {
    pub fn axpy(&mut self, a: f64, o: &NodeDerivs) {
        self.v += a * o.v;
        self.s += a * o.s;
        self.y += a * o.y;
        self.ss += a * o.ss;
        self.sy += a * o.sy;
        self.yy += a * o.yy;
    }
}

/// Weights of the first and second `s`-derivative at `ix`, as `(offset index, weight)`.
/// Weights are for unit spacing; divide by `ds` and `ds^2`.
fn s_weights(ix: usize, nx: usize, closure: SClosure) -> ([(usize, f64); 4], [(usize, f64); 4]) {
    let last = nx - 1;
    if ix > 0 && ix < last {
        return (
            [(ix - 1, -0.5), (ix + 1, 0.5), (ix, 0.0), (ix, 0.0)],
            [(ix - 1, 1.0), (ix, -2.0), (ix + 1, 1.0), (ix, 0.0)],
        );
    }
    match (closure, ix == 0) {
        (SClosure::OneSided, true) => (
            [(0, -1.5), (1, 2.0), (2, -0.5), (0, 0.0)],
            [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)],
        ),
        (SClosure::OneSided, false) => (
            [(last, 1.5), (last - 1, -2.0), (last - 2, 0.5), (last, 0.0)],
            [(last, 2.0), (last - 1, -5.0), (last - 2, 4.0), (last - 3, -1.0)],
        ),
        (SClosure::Mirror, true) => (
            [(0, 0.0); 4],
            [(0, -2.0), (1, 2.0), (0, 0.0), (0, 0.0)],
        ),
        (SClosure::Mirror, false) => (
            [(last, 0.0); 4],
            [(last, -2.0), (last - 1, 2.0), (last, 0.0), (last, 0.0)],
        ),
    }
}

#[inline]
fn wrap(iy: usize, off: isize, ny: usize) -> usize {
    ((iy as isize + off).rem_euclid(ny as isize)) as usize
}

/// Derivatives of `f` at `(ix, iy)`. `f(ix, iy)` samples the grid function.
pub fn node_derivs(
    chart: &CollarChart,
    ix: usize,
    iy: usize,
    closure: SClosure,
    f: impl Fn(usize, usize) -> f64,
) -> NodeDerivs {
    let ds = chart.ds();
    let (w1, w2) = s_weights(ix, chart.nx, closure);
    let ny = chart.ny;
    let v = f(ix, iy);

    let s_first = |iy: usize| w1.iter().map(|&(j, w)| w * f(j, iy)).sum::<f64>() / ds;
    let s = s_first(iy);
    let ss = w2.iter().map(|&(j, w)| w * f(j, iy)).sum::<f64>() / (ds * ds);

    if ny == 1 {
        return NodeDerivs {
            v,
            s,
            ss,
            ..Default::default()
        };
    }
    let dy = chart.dy();
    let (yp, ym) = (wrap(iy, 1, ny), wrap(iy, -1, ny));
    let (fp, fm) = (f(ix, yp), f(ix, ym));
    NodeDerivs {
        v,
        s,
        y: (fp - fm) / (2.0 * dy),
        ss,
        sy: (s_first(yp) - s_first(ym)) / (2.0 * dy),
        yy: (fp - 2.0 * v + fm) / (dy * dy),
    }
}

/// Periodic centered stencil for `d^order/dy^order` (orders 1..=4).
pub fn y_derivative_weights(order: usize) -> Option<&'static [(isize, f64)]> {
    const D1: [(isize, f64); 2] = [(-1, -0.5), (1, 0.5)];
    const D2: [(isize, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];
    const D3: [(isize, f64); 4] = [(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)];
    const D4: [(isize, f64); 5] = [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)];
    match order {
        1 => Some(&D1),
        2 => Some(&D2),
        3 => Some(&D3),
        4 => Some(&D4),
        _ => None,
    }
}

/// Applies a periodic y-stencil of the given order to one grid column at `ix`.
pub fn y_derivative_at(
    chart: &CollarChart,
    ix: usize,
    iy: usize,
    weights: &[(isize, f64)],
    order: usize,
    f: impl Fn(usize, usize) -> f64,
) -> f64 {
    if chart.ny == 1 {
        return 0.0;
    }
    let h = chart.dy().powi(order as i32);
    weights
        .iter()
        .map(|&(o, w)| w * f(ix, wrap(iy, o, chart.ny)))
        .sum::<f64>()
        / h
}
