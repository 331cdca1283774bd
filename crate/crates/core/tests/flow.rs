use std::sync::Arc;

use collarflow::duhamel::contraction_estimate;
use collarflow::flow::explicit_dt_limit;
use collarflow::geometry::{perturb, BackgroundGeometry};
use collarflow::stability::{decay_fit, energy};
use collarflow::{run_flow, Boundary, CollarChart, FlowConfig, FlowError, MetricState, Scheme};

fn hyperbolic(nx: usize) -> Arc<BackgroundGeometry> {
    Arc::new(BackgroundGeometry::hyperbolic(CollarChart::torus(3, 1e-3, 0.5, nx).unwrap()).unwrap())
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    collarflow::stability::ls_slope(&lx, &ly)
}

#[test]
fn contraction_constant_scales_linearly_in_mu() {
    let bg = hyperbolic(32);
    let mus = [0.005, 0.01, 0.02];
    let kappas: Vec<f64> = mus
        .iter()
        .map(|&mu| contraction_estimate(bg.clone(), mu, 0.1, 1e-2, Boundary::Dirichlet, 7).unwrap())
        .collect();
    assert!(kappas.iter().all(|k| *k > 0.0 && *k < 1.0), "{kappas:?}");
    let slope = log_log_slope(&mus, &kappas);
    assert!((slope - 1.0).abs() <= 0.3, "slope {slope}, kappas {kappas:?}");
}

#[test]
fn small_perturbation_decays_and_stays_positive() {
    let bg = hyperbolic(48);
    let g0 = MetricState::unperturbed(bg.clone()).with_perturbation(perturb::random_smooth(&bg, 0.01, 11));
    let cfg = FlowConfig { dt: 5e-3, t_final: 1.5, sample_every: 10, ..Default::default() };
    let tr = run_flow(&g0, &cfg).unwrap();
    assert!(tr.flags.positivity_lost.is_none());
    assert!(tr.flags.monotone_decay);
    assert!(!tr.flags.closeness_exceeded);
    let f0 = tr.samples[0].energy;
    let f1 = tr.samples.last().unwrap().energy;
    assert!(f1 < 1e-6 * f0, "{f0} -> {f1}");
    let fit = decay_fit(&tr, (0.2, 1.5)).unwrap();
    assert!(fit.a_l2 > 0.25 && fit.a_sup > 0.0, "{fit:?}");
}

#[test]
fn explicit_and_implicit_schemes_agree() {
    let bg = hyperbolic(24);
    let g0 = MetricState::unperturbed(bg.clone()).with_perturbation(perturb::random_smooth(&bg, 0.01, 3));
    let steps = 2.0 * (0.1 / explicit_dt_limit(&bg)).ceil();
    let dt = 0.2 / steps;
    let run = |scheme, dt| {
        let cfg = FlowConfig { dt, t_final: 0.2, scheme, sample_every: 1000, ..Default::default() };
        run_flow(&g0, &cfg).unwrap().final_state.v
    };
    let rk = run(Scheme::ExplicitRk2, dt);
    let coarse = run(Scheme::ImexBackwardEuler, 2.0 * dt).sub(&rk).max_abs();
    let fine = run(Scheme::ImexBackwardEuler, dt).sub(&rk).max_abs();
    assert!(fine < 1e-3 * g0.v.max_abs().max(1.0), "{fine}");
    assert!(fine < 0.7 * coarse, "{coarse} -> {fine}");
}

#[test]
fn explicit_step_above_cfl_is_rejected() {
    let bg = hyperbolic(64);
    let g0 = MetricState::unperturbed(bg.clone());
    let cfg = FlowConfig {
        dt: 4.0 * explicit_dt_limit(&bg),
        scheme: Scheme::ExplicitRk2,
        ..Default::default()
    };
    assert!(matches!(run_flow(&g0, &cfg), Err(FlowError::Config(_))));
}

#[test]
fn energy_vanishes_only_at_the_background() {
    let bg = hyperbolic(32);
    let g = MetricState::unperturbed(bg.clone());
    assert_eq!(energy(&g), 0.0);
    let gp = g.with_perturbation(perturb::conformal(&bg, 0.01));
    assert!(energy(&gp) > 0.0);
}

#[test]
fn neumann_runs_conserve_the_conformal_profile_shape() {
    let bg = hyperbolic(32);
    let g0 = MetricState::unperturbed(bg.clone()).with_perturbation(perturb::conformal(&bg, 0.02));
    let cfg = FlowConfig { dt: 1e-3, t_final: 0.1, boundary: Boundary::Neumann, sample_every: 10, ..Default::default() };
    let tr = run_flow(&g0, &cfg).unwrap();
    let v = &tr.final_state.v;
    let (lo, hi) = (0..bg.chart().nodes())
        .map(|node| v.comps(node)[0])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    assert!(hi - lo < 1e-8 * hi.abs(), "{lo} {hi}");
    assert!(hi < 0.02);
}
