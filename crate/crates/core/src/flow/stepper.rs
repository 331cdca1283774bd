//! Time stepping for the normalized Ricci-DeTurck system.

use std::sync::Arc;

use crate::error::{FlowError, Result};
use crate::geometry::background::BackgroundGeometry;
use crate::geometry::state::MetricState;
use crate::geometry::stencil::SClosure;
use crate::geometry::tensor::ZeroFrameTensor;
use crate::spaces::{tensor_sup_report, NormReport};
use crate::stability::energy;

use super::linsolve::{ImplicitSolver, LinearOperator};
use super::operator::{rdtf_rhs, rhs_and_linear};

/// Explicit RK2 requires `dt <= CFL * min(ds^2, dy^2 / x_max^2)`.
pub const CFL: f64 = 0.2;

/// `sup |Z|_h` below which samples are roundoff and carry no decay information.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitRk2,
    /// `(I - dt L) v_new = v + dt (Q(v) + 2E)` with `L` frozen at the background.
    ImexBackwardEuler,
}

/// Closure of the two `s`-ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// `v = 0` at `x_min` and `x_max`.
    #[default]
    Dirichlet,
    /// Zero normal derivative (even reflection) at both ends.
    Neumann,
}

impl Boundary {
    pub fn closure(self) -> SClosure {
        match self {
            Boundary::Dirichlet => SClosure::OneSided,
            Boundary::Neumann => SClosure::Mirror,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub boundary: Boundary,
    pub epsilon_close: f64,
    /// Record a sample every this many steps (and at the last step).
    pub sample_every: usize,
    /// When set to `K`, keep the perturbation at steps `mK - 1, mK, mK + 1`.
    pub snapshot_every: Option<usize>,
    /// Weight `nu` of the sampled norm report.
    pub nu: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::ImexBackwardEuler,
            boundary: Boundary::Dirichlet,
            epsilon_close: 0.1,
            sample_every: 10,
            snapshot_every: None,
            nu: 1.0,
        }
    }
}

impl FlowConfig {
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self, bg: &BackgroundGeometry) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(FlowError::config(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(FlowError::config(format!(
                "T must be non-negative (got {})",
                self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(FlowError::config("sample_every must be >= 1"));
        }
        if self.snapshot_every == Some(0) {
            return Err(FlowError::config("snapshot_every must be >= 1"));
        }
        if self.scheme == Scheme::ExplicitRk2 {
            let limit = explicit_dt_limit(bg);
            if self.dt > limit {
                return Err(FlowError::config(format!(
                    "explicit_rk2 needs dt <= {limit:.3e} (CFL {CFL} * min(ds^2, dy^2/x_max^2)); got dt = {:.3e}",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

pub fn explicit_dt_limit(bg: &BackgroundGeometry) -> f64 {
    let c = bg.chart();
    let mut h2 = c.ds() * c.ds();
    if c.ny > 1 {
        h2 = h2.min((c.dy() / c.x_max()).powi(2));
    }
    CFL * h2
}

/// Reusable stepper; the implicit factorization is built once.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub cfg: FlowConfig,
    bg: Arc<BackgroundGeometry>,
    implicit: Option<ImplicitSolver>,
}

impl Stepper {
    pub fn new(bg: Arc<BackgroundGeometry>, cfg: FlowConfig) -> Result<Self> {
        cfg.validate(&bg)?;
        let implicit = match cfg.scheme {
            Scheme::ImexBackwardEuler => {
                Some(LinearOperator::assemble(&bg, cfg.boundary).implicit(cfg.dt)?)
            }
            Scheme::ExplicitRk2 => None,
        };
        Ok(Stepper { cfg, bg, implicit })
    }

    fn impose(&self, v: &mut ZeroFrameTensor) {
        if self.cfg.boundary == Boundary::Dirichlet {
            v.zero_s_ends();
        }
    }

    /// One step; failures carry the time at which they occurred.
    pub fn step(&self, g: &MetricState) -> Result<MetricState> {
        self.step_inner(g).map_err(|e| FlowError::StepFailed {
            t: g.t,
            source: Box::new(e),
        })
    }

    fn step_inner(&self, g: &MetricState) -> Result<MetricState> {
        let dt = self.cfg.dt;
        let closure = self.cfg.boundary.closure();
        let v = match self.cfg.scheme {
            Scheme::ExplicitRk2 => {
                let k1 = rdtf_rhs(g, closure)?;
                let mut v1 = g.v.clone();
                v1.axpy(dt, &k1);
                self.impose(&mut v1);
                let k2 = rdtf_rhs(&g.with_perturbation(v1), closure)?;
                let mut v = g.v.clone();
                v.axpy(0.5 * dt, &k1);
                v.axpy(0.5 * dt, &k2);
                v
            }
            Scheme::ImexBackwardEuler => {
                let (rhs, lv) = rhs_and_linear(g, closure)?;
                let mut r = g.v.clone();
                r.axpy(dt, &rhs);
                r.axpy(-dt, &lv);
                self.implicit
                    .as_ref()
                    .expect("IMEX stepper owns a factorization")
                    .solve(&r)?
            }
        };
        let mut v = v;
        self.impose(&mut v);
        let out = MetricState {
            bg: self.bg.clone(),
            v,
            t: g.t + dt,
        };
        out.check_positive()?;
        Ok(out)
    }
}

/// One step from `g` (builds a fresh stepper).
pub fn step(g: &MetricState, cfg: &FlowConfig) -> Result<MetricState> {
    Stepper::new(g.bg.clone(), cfg.clone())?.step(g)
}

#[derive(Debug, Clone)]
pub struct FlowSample {
    pub t: f64,
    pub step: usize,
    pub energy: f64,
    pub sup_z: f64,
    pub closeness: f64,
    /// `sup |v|_h / x`
    pub weighted_z: f64,
    pub norm: NormReport,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub v: ZeroFrameTensor,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowFlags {
    /// Time at which positivity was lost, if it was.
    pub positivity_lost: Option<f64>,
    pub closeness_exceeded: bool,
    /// Energy non-increasing between samples after the first 10 steps.
    pub monotone_decay: bool,
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    pub snapshots: Vec<Snapshot>,
    pub flags: FlowFlags,
    pub final_state: MetricState,
    pub dt: f64,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn sample_at(&self, t: f64) -> Option<&FlowSample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Snapshot triplets `(before, centre, after)` around each `mK`.
    pub fn triplets(&self) -> Vec<(&Snapshot, &Snapshot, &Snapshot)> {
        let mut out = Vec::new();
        for w in self.snapshots.windows(3) {
            if w[1].step == w[0].step + 1 && w[2].step == w[1].step + 1 {
                out.push((&w[0], &w[1], &w[2]));
            }
        }
        out
    }
}

fn weighted_z(state: &MetricState) -> f64 {
    let c = state.chart();
    (0..c.nodes()).fold(0.0, |m, node| {
        let (ix, _) = c.node_coords(node);
        m.max(state.v_norm_at(node) / c.x(ix))
    })
}

fn sample(state: &MetricState, step: usize, nu: f64) -> FlowSample {
    FlowSample {
        t: state.t,
        step,
        energy: energy(state),
        sup_z: state.sup_z(),
        closeness: state.closeness(),
        weighted_z: weighted_z(state),
        norm: tensor_sup_report(&state.v, nu),
    }
}

/// Advances `g0` to `T`, recording samples. Loss of positivity stops the run
/// early and is reported in the flags; any other step failure is an error.
pub fn run_flow(g0: &MetricState, cfg: &FlowConfig) -> Result<FlowTrace> {
    let stepper = Stepper::new(g0.bg.clone(), cfg.clone())?;
    run_with(&stepper, g0)
}

pub fn run_with(stepper: &Stepper, g0: &MetricState) -> Result<FlowTrace> {
    let cfg = &stepper.cfg;
    g0.check_positive()?;
    let nsteps = cfg.steps();
    let keep = |k: usize| match cfg.snapshot_every {
        Some(kk) => {
            let r = k % kk;
            k >= kk - 1 && (r == 0 || r == 1 || r == kk - 1)
        }
        None => false,
    };
    let mut samples = vec![sample(g0, 0, cfg.nu)];
    let mut snapshots = Vec::new();
    let mut flags = FlowFlags {
        monotone_decay: true,
        ..Default::default()
    };
    let mut state = g0.clone();
    if keep(0) {
        snapshots.push(Snapshot { step: 0, t: 0.0, v: state.v.clone() });
    }
    for k in 1..=nsteps {
        state = match stepper.step(&state) {
            Ok(s) => s,
            Err(FlowError::StepFailed { t, source }) if matches!(*source, FlowError::PositivityLost { .. }) => {
                flags.positivity_lost = Some(t);
                break;
            }
            Err(e) => return Err(e),
        };
        if keep(k) {
            snapshots.push(Snapshot { step: k, t: state.t, v: state.v.clone() });
        }
        if k % cfg.sample_every == 0 || k == nsteps {
            let s = sample(&state, k, cfg.nu);
            if !s.energy.is_finite() || !s.sup_z.is_finite() {
                return Err(FlowError::StepFailed {
                    t: state.t,
                    source: Box::new(FlowError::PositivityLost {
                        t: state.t,
                        ix: 0,
                        iy: 0,
                        min_eig: f64::NAN,
                    }),
                });
            }
            if s.closeness > cfg.epsilon_close {
                flags.closeness_exceeded = true;
            }
            let prev = samples.last().expect("initial sample");
            if k > 10 && prev.step >= 10 && s.sup_z > ROUNDOFF_FLOOR && s.energy > prev.energy * (1.0 + 1e-12) {
                flags.monotone_decay = false;
            }
            samples.push(s);
        }
    }
    // drop incomplete triplets at the end of the run
    if let Some(kk) = cfg.snapshot_every {
        snapshots.retain(|s| {
            let centre = if s.step % kk == kk - 1 { s.step + 1 } else if s.step % kk == 1 { s.step - 1 } else { s.step };
            centre >= kk && centre < nsteps
        });
    }
    Ok(FlowTrace {
        samples,
        snapshots,
        flags,
        final_state: state,
        dt: cfg.dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_background, perturb, CollarChart};

    #[test]
    fn cfl_is_enforced() {
        let c = CollarChart::torus(3, 1e-3, 0.5, 64).unwrap();
        let g = build_background(c).unwrap();
        let cfg = FlowConfig {
            dt: 1.0,
            scheme: Scheme::ExplicitRk2,
            ..Default::default()
        };
        assert!(matches!(step(&g, &cfg), Err(FlowError::Config(_))));
    }

    #[test]
    fn explicit_conformal_step() {
        let c = CollarChart::torus(3, 1e-3, 0.5, 32).unwrap();
        let g = build_background(c).unwrap();
        let g = g.with_perturbation(perturb::conformal(&g.bg, 0.2));
        let cfg = FlowConfig {
            dt: 1e-3,
            scheme: Scheme::ExplicitRk2,
            boundary: Boundary::Neumann,
            ..Default::default()
        };
        let g1 = step(&g, &cfg).unwrap();
        for node in 0..c.nodes() {
            let w = g1.v.comps(node);
            assert!((w[0] - 0.1988).abs() < 1e-5, "{}", w[0]);
            assert!((w[1] - w[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshots_come_in_triplets() {
        let c = CollarChart::torus(3, 1e-3, 0.5, 16).unwrap();
        let g = build_background(c).unwrap();
        let cfg = FlowConfig {
            dt: 1e-2,
            t_final: 0.2,
            snapshot_every: Some(5),
            ..Default::default()
        };
        let tr = run_flow(&g, &cfg).unwrap();
        let steps: Vec<usize> = tr.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![4, 5, 6, 9, 10, 11, 14, 15, 16]);
        assert_eq!(tr.triplets().len(), 3);
    }
}
