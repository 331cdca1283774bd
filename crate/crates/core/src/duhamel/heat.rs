//! Discrete heat operator `A_t = e^{tL}` and the Duhamel map `H`.

use crate::error::{FlowError, Result};
use crate::flow::linsolve::{ImplicitSolver, Layout, LinearOperator};
use crate::flow::stepper::Boundary;
use crate::geometry::{Anisotropy, BackgroundGeometry, CollarChart, ScalarField, ZeroFrameTensor};
use crate::spaces::{b_derivative, tensor_weighted_sup};

/// Backward-Euler propagator for `d_t u = L u` with `L` frozen at the background.
#[derive(Debug, Clone)]
pub struct HeatPropagator {
    layout: Layout,
    dt: f64,
    /// `None` is the `L = 0` fixture.
    solver: Option<ImplicitSolver>,
}

impl HeatPropagator {
    pub fn new(bg: &BackgroundGeometry, boundary: Boundary, dt: f64) -> Result<Self> {
        Self::from_operator(&LinearOperator::assemble(bg, boundary), dt)
    }

    pub fn from_operator(op: &LinearOperator, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(FlowError::config(format!("dt must be positive (got {dt})")));
        }
        Ok(HeatPropagator {
            layout: op.layout,
            dt,
            solver: Some(op.implicit(dt)?),
        })
    }

    /// Propagator of `L = 0` (the identity semigroup).
    pub fn zero_operator(chart: CollarChart, boundary: Boundary, dt: f64) -> Self {
        HeatPropagator {
            layout: Layout::new(chart, boundary),
            dt,
            solver: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_for(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }

    /// `(I - dt L)^{-1} u`
    pub fn step(&self, u: &ZeroFrameTensor) -> Result<ZeroFrameTensor> {
        match &self.solver {
            Some(s) => s.solve(u),
            None => Ok(self.layout.scatter(&self.layout.gather(u))),
        }
    }

    pub fn apply(&self, phi: &ZeroFrameTensor, steps: usize) -> Result<ZeroFrameTensor> {
        let mut u = phi.clone();
        for _ in 0..steps {
            u = self.step(&u)?;
        }
        Ok(u)
    }

    /// `u_0 = 0`, `u_{k+1} = (I - dt L)^{-1} (u_k + dt f_k)`; returns `u_0 ..= u_N`.
    pub fn convolve(&self, f: &[ZeroFrameTensor]) -> Result<Vec<ZeroFrameTensor>> {
        let Some(first) = f.first() else {
            return Err(FlowError::Precondition("empty source path".into()));
        };
        let mut path = Vec::with_capacity(f.len() + 1);
        path.push(ZeroFrameTensor::zeros(*first.chart()));
        for fk in f {
            let mut r = path.last().expect("non-empty path").clone();
            r.axpy(self.dt, fk);
            path.push(self.step(&r)?);
        }
        Ok(path)
    }
}

/// `A_t phi` by `round(t / dt)` implicit steps.
pub fn heat_apply(
    phi: &ZeroFrameTensor,
    t: f64,
    bg: &BackgroundGeometry,
    boundary: Boundary,
    dt: f64,
) -> Result<ZeroFrameTensor> {
    if t < 0.0 {
        return Err(FlowError::Precondition(format!("heat time must be >= 0 (got {t})")));
    }
    let a = HeatPropagator::new(bg, boundary, dt)?;
    a.apply(phi, a.steps_for(t))
}

/// `H f` on the time grid of `f` (one source sample per step).
pub fn duhamel_convolve(
    f: &[ZeroFrameTensor],
    bg: &BackgroundGeometry,
    boundary: Boundary,
    dt: f64,
) -> Result<Vec<ZeroFrameTensor>> {
    HeatPropagator::new(bg, boundary, dt)?.convolve(f)
}

/// `sup_t |A_t phi|_{xC^0} / |phi|_{xC^0}` over `t in [0, t_final]`.
pub fn weight_preservation(
    a: &HeatPropagator,
    phi: &ZeroFrameTensor,
    t_final: f64,
) -> Result<f64> {
    let base = tensor_weighted_sup(phi, 1.0);
    if base == 0.0 {
        return Ok(0.0);
    }
    let mut u = phi.clone();
    let mut worst: f64 = 1.0;
    for _ in 0..a.steps_for(t_final) {
        u = a.step(&u)?;
        worst = worst.max(tensor_weighted_sup(&u, 1.0) / base);
    }
    Ok(worst)
}

/// Componentwise `d_y` of a tensor field.
pub fn dy_tensor(v: &ZeroFrameTensor) -> Result<ZeroFrameTensor> {
    let c = *v.chart();
    let nc = c.ncomp();
    let mut out = ZeroFrameTensor::zeros(c);
    for k in 0..nc {
        let d = b_derivative(&ScalarField::component(v, k), 1)?;
        for (node, val) in d.data().iter().enumerate() {
            out.comps_mut(node)[k] = *val;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    /// `|[A_t, d_y] f|_{xC^0} / |f|_{xC^0}` for each test field.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Measures `[A_t, d_y] f = A_t d_y f - d_y A_t f` over a battery of fields.
pub fn commutator_check(a: &HeatPropagator, fields: &[ZeroFrameTensor], t: f64) -> Result<CommutatorReport> {
    let mut ratios = Vec::with_capacity(fields.len());
    for f in fields {
        if f.chart().anisotropy != Anisotropy::OneTangential {
            return Err(FlowError::Precondition(
                "commutator check needs a one_tangential chart".into(),
            ));
        }
        let steps = a.steps_for(t);
        let lhs = a.apply(&dy_tensor(f)?, steps)?;
        let rhs = dy_tensor(&a.apply(f, steps)?)?;
        let base = tensor_weighted_sup(f, 1.0);
        let num = tensor_weighted_sup(&lhs.sub(&rhs), 1.0);
        ratios.push(if base == 0.0 { 0.0 } else { num / base });
    }
    let max_ratio = ratios.iter().fold(0.0_f64, |m, r| m.max(*r));
    Ok(CommutatorReport { ratios, max_ratio })
}
