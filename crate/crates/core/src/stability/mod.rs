//! Energy decay, the pointwise `|Z|^2` inequality, the spectral bound and Kato.

pub mod decay;
pub mod energy;
pub mod inequality;
mod scalar;
pub mod spectrum;

pub use decay::{
    coefficient_chain_holds, decay_fit, energy_coefficient, eta_threshold, ls_slope, sup_rate_bound, DecayFit,
    DEFAULT_WINDOW,
};
pub use energy::{energy, volume};
pub use inequality::{
    curvature_term_bound, kato_check, kato_check_trace, pointwise_inequality_residual,
    InequalityParams, InequalityReport, KatoReport,
};
pub use spectrum::{lambda0_estimate, Lambda0};

use crate::error::Result;
use crate::flow::stepper::FlowTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityParams {
    pub epsilon: f64,
    pub b_n: f64,
    /// Assumed `eta` entering `b(n) eta`; the measured value is reported separately.
    pub eta: f64,
    pub window: (f64, f64),
    pub with_lambda0: bool,
    pub with_inequality: bool,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            epsilon: 0.1,
            b_n: 1.0,
            eta: 0.0,
            window: DEFAULT_WINDOW,
            with_lambda0: true,
            with_inequality: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StabilityReport {
    /// `sup |R + R^cc|_h` of the background.
    pub eta_measured: f64,
    /// Largest closeness `sup |v|_{op,h}` along the run.
    pub epsilon_measured: f64,
    pub energy: Vec<(f64, f64)>,
    pub sup_z: Vec<(f64, f64)>,
    pub a_l2: Option<f64>,
    pub a_sup: Option<f64>,
    pub fit_error: Option<String>,
    pub lambda0: Option<f64>,
    pub residual: Option<InequalityReport>,
    pub kato: Option<KatoReport>,
    /// Measured curvature coefficient `b(n) eta` at the final state.
    pub curvature_term: f64,
    pub coefficient: f64,
    pub chain_holds: bool,
}

/// Post-processes a trace produced with the given boundary closure.
pub fn analyze(trace: &FlowTrace, closure: crate::geometry::SClosure, p: &StabilityParams) -> Result<StabilityReport> {
    let bg = &trace.final_state.bg;
    let n = bg.chart().n;
    let mut rep = StabilityReport {
        eta_measured: bg.eta(),
        epsilon_measured: trace.samples.iter().fold(0.0, |m, s| m.max(s.closeness)),
        energy: trace.samples.iter().map(|s| (s.t, s.energy)).collect(),
        sup_z: trace.samples.iter().map(|s| (s.t, s.sup_z)).collect(),
        ..Default::default()
    };
    match decay_fit(trace, p.window) {
        Ok(f) => {
            rep.a_l2 = Some(f.a_l2);
            rep.a_sup = Some(f.a_sup);
        }
        Err(e) => rep.fit_error = Some(e.to_string()),
    }
    if p.with_lambda0 {
        rep.lambda0 = Some(lambda0_estimate(bg)?.value);
    }
    let b_eta = p.b_n * p.eta;
    if p.with_inequality && !trace.triplets().is_empty() {
        rep.residual = Some(pointwise_inequality_residual(
            trace,
            InequalityParams { epsilon: p.epsilon, b_eta, closure },
        )?);
    }
    rep.kato = Some(kato_check_trace(trace, closure));
    rep.curvature_term = curvature_term_bound(&trace.final_state);
    rep.coefficient = energy_coefficient(n, p.epsilon, b_eta);
    rep.chain_holds = coefficient_chain_holds(n, p.epsilon, b_eta);
    Ok(rep)
}
