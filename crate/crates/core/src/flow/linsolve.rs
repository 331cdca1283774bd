//! Block-tridiagonal linear algebra along `s`.
//!
//! Every operator used implicitly here has a 3-point footprint in `s` and in
//! `y`, so with unknowns ordered `s`-block by `s`-block it is block
//! tridiagonal with dense `(Ny * ncomp)`-sized blocks. Blocks are recovered by
//! probing the operator with coloured unit fields, which keeps the matrix
//! assembly in lockstep with the pointwise operator code.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{FlowError, Result};
use crate::geometry::background::BackgroundGeometry;
use crate::geometry::tensor::ZeroFrameTensor;
use crate::geometry::CollarChart;

use super::operator::lichnerowicz_apply;
use super::stepper::Boundary;

#[derive(Debug, Clone)]
pub struct BlockTridiag {
    nb: usize,
    m: usize,
    /// `lower[i]` couples block `i` to `i - 1` (`lower[0]` unused).
    lower: Vec<DMatrix<f64>>,
    diag: Vec<DMatrix<f64>>,
    /// `upper[i]` couples block `i` to `i + 1` (last unused).
    upper: Vec<DMatrix<f64>>,
}

/// Smallest period `p >= 3` dividing `ny` (or `ny` itself) so that a 3-point
/// periodic stencil never sees two probed nodes.
fn y_period(ny: usize) -> usize {
    if ny < 3 {
        return ny;
    }
    (3..=ny).find(|p| ny.is_multiple_of(*p)).unwrap_or(ny)
}

impl BlockTridiag {
    /// Recovers the block-tridiagonal matrix of a linear map on `nb` blocks of
    /// `ny * ncomp` unknowns (row index within a block is `iy * ncomp + c`).
    pub fn probe(nb: usize, ny: usize, ncomp: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let m = ny * ncomp;
        let zero = || DMatrix::<f64>::zeros(m, m);
        let mut lower: Vec<_> = (0..nb).map(|_| zero()).collect();
        let mut diag: Vec<_> = (0..nb).map(|_| zero()).collect();
        let mut upper: Vec<_> = (0..nb).map(|_| zero()).collect();
        let p = y_period(ny);
        let mut probe = vec![0.0; nb * m];
        for cs in 0..3.min(nb) {
            for cy in 0..p {
                for c in 0..ncomp {
                    probe.fill(0.0);
                    for b in (cs..nb).step_by(3) {
                        for iy in (cy..ny).step_by(p) {
                            probe[b * m + iy * ncomp + c] = 1.0;
                        }
                    }
                    let out = apply(&probe);
                    for br in 0..nb {
                        // the unique probed block within reach of row block br
                        let lo = br.saturating_sub(1);
                        let hi = (br + 1).min(nb - 1);
                        for bc in lo..=hi {
                            if bc % 3 != cs {
                                continue;
                            }
                            let blk = match bc as isize - br as isize {
                                -1 => &mut lower[br],
                                0 => &mut diag[br],
                                _ => &mut upper[br],
                            };
                            for iyr in 0..ny {
                                for off in [-1isize, 0, 1] {
                                    let iyc = (iyr as isize + off).rem_euclid(ny as isize) as usize;
                                    if iyc % p != cy || (ny < 3 && off != 0) {
                                        continue;
                                    }
                                    for cr in 0..ncomp {
                                        blk[(iyr * ncomp + cr, iyc * ncomp + c)] =
                                            out[br * m + iyr * ncomp + cr];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        BlockTridiag {
            nb,
            m,
            lower,
            diag,
            upper,
        }
    }

    pub fn blocks(&self) -> usize {
        self.nb
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; self.nb * m];
        for b in 0..self.nb {
            let mut acc = &self.diag[b] * DVector::from_column_slice(&x[b * m..(b + 1) * m]);
            if b > 0 {
                acc += &self.lower[b] * DVector::from_column_slice(&x[(b - 1) * m..b * m]);
            }
            if b + 1 < self.nb {
                acc += &self.upper[b] * DVector::from_column_slice(&x[(b + 1) * m..(b + 2) * m]);
            }
            y[b * m..(b + 1) * m].copy_from_slice(acc.as_slice());
        }
        y
    }

    /// Factors `alpha I + beta A` by block Thomas elimination.
    pub fn factor_shifted(&self, alpha: f64, beta: f64) -> Result<BlockThomas> {
        let (nb, m) = (self.nb, self.m);
        let mut lus = Vec::with_capacity(nb);
        let mut w = Vec::with_capacity(nb);
        let lower: Vec<DMatrix<f64>> = self.lower.iter().map(|l| l * beta).collect();
        for b in 0..nb {
            let mut dp = &self.diag[b] * beta + DMatrix::identity(m, m) * alpha;
            if b > 0 {
                let wprev: &DMatrix<f64> = &w[b - 1];
                dp -= &lower[b] * wprev;
            }
            let lu = dp.lu();
            if !lu.is_invertible() {
                return Err(FlowError::LinearSolve(format!(
                    "singular pivot block {b} of {nb}"
                )));
            }
            let c = &self.upper[b] * beta;
            let wb = if b + 1 < nb {
                lu.solve(&c)
                    .ok_or_else(|| FlowError::LinearSolve(format!("pivot block {b} solve failed")))?
            } else {
                DMatrix::zeros(m, m)
            };
            lus.push(lu);
            w.push(wb);
        }
        Ok(BlockThomas { m, lus, w, lower })
    }
}

/// Factored block-tridiagonal system.
#[derive(Debug, Clone)]
pub struct BlockThomas {
    m: usize,
    lus: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    w: Vec<DMatrix<f64>>,
    lower: Vec<DMatrix<f64>>,
}

impl BlockThomas {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (nb, m) = (self.lus.len(), self.m);
        let mut y: Vec<DVector<f64>> = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut r = DVector::from_column_slice(&rhs[b * m..(b + 1) * m]);
            if b > 0 {
                r -= &self.lower[b] * &y[b - 1];
            }
            let yb = self.lus[b]
                .solve(&r)
                .ok_or_else(|| FlowError::LinearSolve(format!("forward sweep failed at block {b}")))?;
            y.push(yb);
        }
        for b in (0..nb.saturating_sub(1)).rev() {
            let corr = &self.w[b] * &y[b + 1];
            y[b] -= corr;
        }
        let mut out = Vec::with_capacity(nb * m);
        for yb in &y {
            out.extend_from_slice(yb.as_slice());
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(FlowError::LinearSolve("non-finite solution".into()))
        }
    }
}

/// Which `s`-layers carry unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub chart: CollarChart,
    pub first: usize,
    pub blocks: usize,
}

impl Layout {
    pub fn new(chart: CollarChart, boundary: Boundary) -> Self {
        match boundary {
            Boundary::Dirichlet => Layout {
                chart,
                first: 1,
                blocks: chart.nx - 2,
            },
            Boundary::Neumann => Layout {
                chart,
                first: 0,
                blocks: chart.nx,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.blocks * self.chart.ny * self.chart.ncomp()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gather(&self, t: &ZeroFrameTensor) -> Vec<f64> {
        let nc = self.chart.ncomp();
        let start = self.first * self.chart.ny * nc;
        t.data()[start..start + self.len()].to_vec()
    }

    /// Inverse of `gather`; non-unknown layers are zero.
    pub fn scatter(&self, x: &[f64]) -> ZeroFrameTensor {
        let mut t = ZeroFrameTensor::zeros(self.chart);
        let nc = self.chart.ncomp();
        let start = self.first * self.chart.ny * nc;
        t.data_mut()[start..start + self.len()].copy_from_slice(x);
        t
    }
}

/// Assembled background operator `L` with its boundary closure.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub layout: Layout,
    pub boundary: Boundary,
    pub matrix: BlockTridiag,
}

impl LinearOperator {
    pub fn assemble(bg: &BackgroundGeometry, boundary: Boundary) -> Self {
        let chart = *bg.chart();
        let layout = Layout::new(chart, boundary);
        let closure = boundary.closure();
        let matrix = BlockTridiag::probe(layout.blocks, chart.ny, chart.ncomp(), |x| {
            layout.gather(&lichnerowicz_apply(&layout.scatter(x), bg, closure))
        });
        LinearOperator {
            layout,
            boundary,
            matrix,
        }
    }

    pub fn apply(&self, v: &ZeroFrameTensor) -> ZeroFrameTensor {
        self.layout.scatter(&self.matrix.matvec(&self.layout.gather(v)))
    }

    /// Factorization of `I - dt L`.
    pub fn implicit(&self, dt: f64) -> Result<ImplicitSolver> {
        Ok(ImplicitSolver {
            layout: self.layout,
            dt,
            thomas: self.matrix.factor_shifted(1.0, -dt)?,
        })
    }
}

/// Solves `(I - dt L) u = r` on the unknown layers.
#[derive(Debug, Clone)]
pub struct ImplicitSolver {
    pub layout: Layout,
    pub dt: f64,
    thomas: BlockThomas,
}

impl ImplicitSolver {
    pub fn solve(&self, rhs: &ZeroFrameTensor) -> Result<ZeroFrameTensor> {
        let x = self.thomas.solve(&self.layout.gather(rhs))?;
        Ok(self.layout.scatter(&x))
    }
}
