//! Symmetric 2-tensor fields in the 0-frame `{dx/x, dy^a/x}` under a symmetry ansatz.
//!
//! Isotropic fields store `(xx, tang)`; one-tangential fields store
//! `(xx, xy, yy, zz)` where `zz` is the common diagonal value of the `n - 1`
//! suppressed tangential directions. Frame index 0 is the normal direction,
//! index 1 is `y^1`, and indices `2..=n` are the suppressed directions.

use super::chart::{Anisotropy, CollarChart};

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroFrameTensor {
    chart: CollarChart,
    data: Vec<f64>,
}

impl ZeroFrameTensor {
    pub fn zeros(chart: CollarChart) -> Self {
        ZeroFrameTensor {
            chart,
            data: vec![0.0; chart.nodes() * chart.ncomp()],
        }
    }

    /// Builds a field from ansatz components `f(x, y) -> [c0, c1, c2, c3]`
    /// (only the first `ncomp` entries are used).
    pub fn from_fn(chart: CollarChart, f: impl Fn(f64, f64) -> [f64; 4]) -> Self {
        let mut t = Self::zeros(chart);
        let nc = chart.ncomp();
        for ix in 0..chart.nx {
            let x = chart.x(ix);
            for iy in 0..chart.ny {
                let c = f(x, chart.y(iy));
                let node = chart.node(ix, iy);
                t.data[node * nc..(node + 1) * nc].copy_from_slice(&c[..nc]);
            }
        }
        t
    }

    /// Pure-trace field `w(x, y) * identity` in frame components.
    pub fn pure_trace(chart: CollarChart, w: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(chart, |x, y| {
            let v = w(x, y);
            match chart.anisotropy {
                Anisotropy::Isotropic => [v, v, 0.0, 0.0],
                Anisotropy::OneTangential => [v, 0.0, v, v],
            }
        })
    }

    pub fn from_data(chart: CollarChart, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), chart.nodes() * chart.ncomp());
        ZeroFrameTensor { chart, data }
    }

    #[inline]
    pub fn chart(&self) -> &CollarChart {
        &self.chart
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.chart.ncomp()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn comps(&self, node: usize) -> &[f64] {
        let nc = self.ncomp();
        &self.data[node * nc..(node + 1) * nc]
    }

    #[inline]
    pub fn comps_mut(&mut self, node: usize) -> &mut [f64] {
        let nc = self.ncomp();
        &mut self.data[node * nc..(node + 1) * nc]
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize, c: usize) -> f64 {
        self.data[self.chart.node(ix, iy) * self.ncomp() + c]
    }

    /// Full `(n+1) x (n+1)` row-major frame matrix at a node.
    pub fn matrix_at(&self, node: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.chart.dim() * self.chart.dim()];
        expand_into(&self.chart, self.comps(node), &mut m);
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        ZeroFrameTensor {
            chart: self.chart,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &ZeroFrameTensor) {
        debug_assert_eq!(self.chart, other.chart);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn sub(&self, other: &ZeroFrameTensor) -> Self {
        let mut r = self.clone();
        r.axpy(-1.0, other);
        r
    }

    pub fn add(&self, other: &ZeroFrameTensor) -> Self {
        let mut r = self.clone();
        r.axpy(1.0, other);
        r
    }

    /// Sets every component on the `s`-ends to zero.
    pub fn zero_s_ends(&mut self) {
        let nc = self.ncomp();
        for &ix in &[0, self.chart.nx - 1] {
            for iy in 0..self.chart.ny {
                let node = self.chart.node(ix, iy);
                self.data[node * nc..(node + 1) * nc].fill(0.0);
            }
        }
    }
}

/// Writes the ansatz expansion of `comps` into the row-major matrix `m`.
pub fn expand_into(chart: &CollarChart, comps: &[f64], m: &mut [f64]) {
    let dim = chart.dim();
    m.fill(0.0);
    match chart.anisotropy {
        Anisotropy::Isotropic => {
            m[0] = comps[0];
            for k in 1..dim {
                m[k * dim + k] = comps[1];
            }
        }
        Anisotropy::OneTangential => {
            m[0] = comps[0];
            m[1] = comps[1];
            m[dim] = comps[1];
            m[dim + 1] = comps[2];
            for k in 2..dim {
                m[k * dim + k] = comps[3];
            }
        }
    }
}

/// Projects a symmetric frame matrix onto the ansatz, returning the largest
/// discarded entry (zero when the matrix already respects the ansatz).
pub fn project_from(chart: &CollarChart, m: &[f64], comps: &mut [f64]) -> f64 {
    let dim = chart.dim();
    match chart.anisotropy {
        Anisotropy::Isotropic => {
            comps[0] = m[0];
            comps[1] = (1..dim).map(|k| m[k * dim + k]).sum::<f64>() / (dim - 1) as f64;
        }
        Anisotropy::OneTangential => {
            comps[0] = m[0];
            comps[1] = 0.5 * (m[1] + m[dim]);
            comps[2] = m[dim + 1];
            comps[3] = (2..dim).map(|k| m[k * dim + k]).sum::<f64>() / (dim - 2) as f64;
        }
    }
    let mut back = vec![0.0; dim * dim];
    expand_into(chart, comps, &mut back);
    m.iter()
        .zip(&back)
        .fold(0.0_f64, |e, (a, b)| e.max((a - b).abs()))
}

/// Scalar grid function on a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    chart: CollarChart,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(chart: CollarChart) -> Self {
        ScalarField {
            chart,
            data: vec![0.0; chart.nodes()],
        }
    }

    pub fn from_fn(chart: CollarChart, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(chart.nodes());
        for ix in 0..chart.nx {
            let x = chart.x(ix);
            for iy in 0..chart.ny {
                data.push(f(x, chart.y(iy)));
            }
        }
        ScalarField { chart, data }
    }

    pub fn from_data(chart: CollarChart, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), chart.nodes());
        ScalarField { chart, data }
    }

    /// Component `c` of a tensor field as a scalar field.
    pub fn component(t: &ZeroFrameTensor, c: usize) -> Self {
        let nc = t.ncomp();
        ScalarField {
            chart: *t.chart(),
            data: t.data().chunks(nc).map(|ch| ch[c]).collect(),
        }
    }

    #[inline]
    pub fn chart(&self) -> &CollarChart {
        &self.chart
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[self.chart.node(ix, iy)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::Mode;

    #[test]
    fn expansion_has_no_off_ansatz_entries() {
        let c = CollarChart::new(Mode::Torus, 4, 0.01, 0.5, 16, 8, Anisotropy::OneTangential).unwrap();
        let t = ZeroFrameTensor::from_fn(c, |x, y| [x, y.sin(), 2.0, -1.0]);
        let m = t.matrix_at(c.node(3, 2));
        let dim = c.dim();
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(m[i * dim + j], m[j * dim + i]);
                let on = (i == j) || (i + j == 1);
                if !on {
                    assert_eq!(m[i * dim + j], 0.0);
                }
            }
        }
        let mut back = [0.0; 4];
        assert_eq!(project_from(&c, &m, &mut back), 0.0);
        assert_eq!(&back[..], t.comps(c.node(3, 2)));
    }
}
