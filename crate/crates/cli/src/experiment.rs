//! Experiment orchestration: builds the run from a config and collects the
//! series rows, the summary and the pass/fail checks.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use collarflow::duhamel::{contraction_estimate, picard_solve, PicardConfig};
use collarflow::flow::{condition_decompose, deturck_vector_field, FlowSample};
use collarflow::geometry::curvature::{christoffel_symmetry_defect, riemann_symmetry_defect};
use collarflow::geometry::{inverse_expansion, perturb, riemann_ricci, BackgroundGeometry};
use collarflow::spaces::tensor_weighted_sup;
use collarflow::stability::{analyze, energy, eta_threshold, lambda0_estimate, sup_rate_bound, StabilityParams};
use collarflow::{run_flow, Background, FlowConfig, FlowError, MetricState, Mode, ZeroFrameTensor};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Kind, Perturbation};
use crate::output::{put, render_series, write_atomic, SeriesRow, Summary};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("admissibility gate failed: b_n * eta = {b_eta} is not below 1/8; need eta < eta(n) = 1/(8 b_n) = {threshold}")]
    Gate { b_eta: f64, threshold: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl ExperimentError {
    /// `2` for configuration problems, `1` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Flow(FlowError::Config(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: Kind,
    pub rows: Vec<SeriesRow>,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Run {
    rows: Vec<SeriesRow>,
    result: Vec<(String, crate::output::Value)>,
    checks: Vec<Check>,
}

impl Run {
    fn new() -> Self {
        Run { rows: Vec::new(), result: Vec::new(), checks: Vec::new() }
    }

    fn check(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, kind: Kind) -> Result<Outcome, ExperimentError> {
    let bg = Arc::new(BackgroundGeometry::new(cfg.chart()?, cfg.background)?);
    let run = match kind {
        Kind::Simulate => simulate(cfg, &bg)?,
        Kind::CheckIdentities => check_identities(cfg, &bg)?,
        Kind::Duhamel => duhamel(cfg, &bg)?,
        Kind::Stability => stability(cfg, &bg)?,
        Kind::Spectrum => spectrum(&bg)?,
    };
    let mut summary = Summary::default();
    let passed = run.checks.iter().all(|c| c.passed);
    let head = summary.section("run");
    put(head, "experiment", kind.name());
    put(head, "status", if passed { "pass" } else { "fail" });
    let conf = summary.section("config");
    for (k, v) in cfg.entries() {
        put(conf, k, v);
    }
    summary.section("result").extend(run.result);
    let checks = summary.section("checks");
    for c in &run.checks {
        put(checks, c.name, format!("{} ({})", if c.passed { "pass" } else { "fail" }, c.detail));
    }
    Ok(Outcome { kind, rows: run.rows, summary, checks: run.checks })
}

/// Writes the series table and the summary into `dir`.
pub fn emit(outcome: &Outcome, cfg: &ExperimentConfig, dir: &Path) -> Result<(PathBuf, PathBuf), ExperimentError> {
    if outcome.rows.is_empty() {
        return Err(ExperimentError::Precondition("empty series".into()));
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let series = dir.join(&cfg.series_file);
    let summary = dir.join(&cfg.summary_file);
    write_atomic(&series, &render_series(&outcome.rows)).map_err(io(&series))?;
    write_atomic(&summary, &outcome.summary.render()).map_err(io(&summary))?;
    Ok((series, summary))
}

fn initial_state(cfg: &ExperimentConfig, bg: &Arc<BackgroundGeometry>) -> MetricState {
    let v = match cfg.perturbation {
        Perturbation::None => ZeroFrameTensor::zeros(*bg.chart()),
        Perturbation::Conformal { w0 } => perturb::conformal(bg, w0),
        Perturbation::Bump { amplitude, center, width } => perturb::bump(bg, amplitude, center, width),
        Perturbation::RandomSmooth { amplitude } => perturb::random_smooth(bg, amplitude, cfg.seed),
    };
    MetricState::unperturbed(bg.clone()).with_perturbation(v)
}

fn flow_config(cfg: &ExperimentConfig) -> FlowConfig {
    FlowConfig {
        dt: cfg.dt,
        t_final: cfg.t_final,
        scheme: cfg.scheme,
        boundary: cfg.boundary,
        epsilon_close: cfg.epsilon_close,
        sample_every: cfg.sample_every,
        snapshot_every: cfg.snapshot_every,
        nu: cfg.nu,
    }
}

fn sample_row(s: &FlowSample) -> SeriesRow {
    SeriesRow {
        energy: Some(s.energy),
        sup_z: Some(s.sup_z),
        wnorm: Some(s.norm.weighted_sup),
        ..SeriesRow::at(s.t)
    }
}

fn simulate(cfg: &ExperimentConfig, bg: &Arc<BackgroundGeometry>) -> Result<Run, ExperimentError> {
    let g0 = initial_state(cfg, bg);
    let tr = run_flow(&g0, &flow_config(cfg))?;
    let mut run = Run::new();
    run.rows = tr.samples.iter().map(sample_row).collect();
    let last = tr.samples.last().expect("a trace has its initial sample");
    let r = &mut run.result;
    put(r, "samples", tr.samples.len());
    put(r, "t_final", last.t);
    put(r, "F_initial", tr.samples[0].energy);
    put(r, "F_final", last.energy);
    put(r, "supZ_initial", tr.samples[0].sup_z);
    put(r, "supZ_final", last.sup_z);
    put(r, "closeness_max", tr.samples.iter().fold(0.0_f64, |m, s| m.max(s.closeness)));
    put(r, "positivity_lost_at", tr.flags.positivity_lost);
    put(r, "closeness_exceeded", tr.flags.closeness_exceeded);
    put(r, "monotone_decay", tr.flags.monotone_decay);
    run.check(
        "positivity",
        tr.flags.positivity_lost.is_none(),
        tr.flags.positivity_lost.map_or("kept".into(), |t| format!("lost at t = {t:.4}")),
    );
    Ok(run)
}

fn check_identities(cfg: &ExperimentConfig, bg: &Arc<BackgroundGeometry>) -> Result<Run, ExperimentError> {
    let closure = cfg.boundary.closure();
    let chart = *bg.chart();
    let d = chart.dim();
    let base = MetricState::unperturbed(bg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut dec, mut inv, mut riem, mut chr) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let states = cfg.identity_states;
    for k in 0..states {
        let amp = 0.01 + 0.19 * k as f64 / (states.max(2) - 1) as f64;
        let g = base.with_perturbation(perturb::random_smooth(bg, amp, rng.next_u64()));
        dec = dec.max(condition_decompose(&g, closure)?.identity_residual());
        for node in 0..chart.nodes() {
            inv = inv.max(inverse_expansion(d, &bg.node(node).h, &g.v.matrix_at(node))?.identity_error);
        }
        let b = riemann_ricci(&g)?;
        riem = riem.max(riemann_symmetry_defect(&b));
        chr = chr.max(christoffel_symmetry_defect(&b));
    }
    let origin = condition_decompose(&base, closure)?;
    let q0 = origin.qv.max_abs().max(origin.lv.max_abs());
    let w0 = deturck_vector_field(&base, closure)?.max_abs();

    let mut run = Run::new();
    run.rows = vec![SeriesRow {
        energy: Some(energy(&base)),
        sup_z: Some(base.sup_z()),
        wnorm: Some(tensor_weighted_sup(&base.v, cfg.nu)),
        ..SeriesRow::at(0.0)
    }];
    let r = &mut run.result;
    put(r, "states", states);
    put(r, "decomposition_residual", dec);
    put(r, "inverse_expansion_error", inv);
    put(r, "riemann_symmetry_defect", riem);
    put(r, "christoffel_symmetry_defect", chr);
    put(r, "origin_linear_and_quadratic", q0);
    put(r, "deturck_field_at_background", w0);
    run.check("decomposition", dec <= 1e-10, format!("{dec:.2e} <= 1e-10"));
    run.check("inverse_expansion", inv <= 1e-12, format!("{inv:.2e} <= 1e-12"));
    run.check("riemann_symmetry", riem <= 1e-10, format!("{riem:.2e} <= 1e-10"));
    run.check("christoffel_symmetry", chr <= 1e-12, format!("{chr:.2e} <= 1e-12"));
    run.check("origin", q0 <= 1e-12, format!("{q0:.2e} <= 1e-12"));
    run.check("deturck_background", w0 <= 1e-12, format!("{w0:.2e} <= 1e-12"));
    Ok(run)
}

fn duhamel(cfg: &ExperimentConfig, bg: &Arc<BackgroundGeometry>) -> Result<Run, ExperimentError> {
    let pc = PicardConfig {
        dt: cfg.dt,
        t_final: cfg.t_final,
        boundary: cfg.boundary,
        tol: cfg.picard_tol,
        max_iter: cfg.picard_max_iter,
        nu: cfg.nu,
        compare_direct: true,
    };
    let (path, rep) = picard_solve(bg.clone(), &pc)?;
    let kappa_mu = contraction_estimate(bg.clone(), cfg.mu, cfg.t_final, cfg.dt, cfg.boundary, cfg.seed)?;
    let base = MetricState::unperturbed(bg.clone());
    let mut run = Run::new();
    let last = path.len() - 1;
    for (k, v) in path.iter().enumerate() {
        if k % cfg.sample_every != 0 && k != last {
            continue;
        }
        let g = base.with_perturbation(v.clone());
        run.rows.push(SeriesRow {
            energy: Some(energy(&g)),
            sup_z: Some(g.sup_z()),
            wnorm: Some(tensor_weighted_sup(v, cfg.nu)),
            kappa_hat: (k == last).then_some(rep.kappa_hat),
            ..SeriesRow::at(k as f64 * cfg.dt)
        });
    }
    let resid = rep.residual_vs_direct.unwrap_or(f64::NAN);
    let tol = rep.truncation_estimate.max(1e-12);
    let r = &mut run.result;
    put(r, "weighted_eta", bg.weighted_eta());
    put(r, "iterations", rep.iterations());
    put(r, "kappa_hat", rep.kappa_hat);
    put(r, "kappa_random_pairs", kappa_mu);
    put(r, "schauder_ratio", rep.schauder_ratio);
    put(r, "residual_vs_direct", resid);
    put(r, "truncation_estimate", rep.truncation_estimate);
    put(r, "converged", rep.converged);
    run.check("contraction", rep.kappa_hat < 1.0, format!("kappa_hat {:.3e} < 1", rep.kappa_hat));
    run.check("random_pairs", kappa_mu < 1.0, format!("{kappa_mu:.3e} < 1 at mu = {}", cfg.mu));
    run.check("matches_direct", resid <= tol, format!("{resid:.2e} <= {tol:.2e}"));
    Ok(run)
}

fn stability(cfg: &ExperimentConfig, bg: &Arc<BackgroundGeometry>) -> Result<Run, ExperimentError> {
    let b_eta = cfg.b_n * cfg.eta;
    let threshold = eta_threshold(cfg.b_n);
    if cfg.eta >= threshold {
        return Err(ExperimentError::Gate { b_eta, threshold });
    }
    let mut fc = flow_config(cfg);
    fc.snapshot_every = fc.snapshot_every.or(Some(10 * cfg.sample_every));
    let tr = run_flow(&initial_state(cfg, bg), &fc)?;
    let params = StabilityParams {
        epsilon: cfg.epsilon,
        b_n: cfg.b_n,
        eta: cfg.eta,
        window: cfg.fit_window,
        with_lambda0: true,
        with_inequality: true,
    };
    let rep = analyze(&tr, cfg.boundary.closure(), &params)?;
    let n = bg.chart().n;

    let mut run = Run::new();
    run.rows = tr.samples.iter().map(sample_row).collect();
    if let Some(row) = run.rows.last_mut() {
        row.lambda0 = rep.lambda0;
        row.residual_max = rep.residual.map(|x| x.max_residual);
        row.kato_max = rep.kato.filter(|k| k.evaluated > 0).map(|k| k.max_violation);
    }
    let r = &mut run.result;
    put(r, "eta", rep.eta_measured);
    put(r, "eta_assumed", cfg.eta);
    put(r, "eta_threshold", threshold);
    put(r, "epsilon", rep.epsilon_measured);
    put(r, "epsilon_assumed", cfg.epsilon);
    put(r, "a_L2", rep.a_l2);
    put(r, "a_sup", rep.a_sup);
    put(r, "fit_error", rep.fit_error.clone());
    put(r, "lambda0", rep.lambda0);
    put(r, "residual_max", rep.residual.map(|x| x.max_residual));
    put(r, "residual_scale", rep.residual.map(|x| x.scale));
    put(r, "kato_max", rep.kato.filter(|k| k.evaluated > 0).map(|k| k.max_violation));
    put(r, "kato_slack", rep.kato.map(|k| k.slack));
    put(r, "curvature_term", rep.curvature_term);
    put(r, "coefficient", rep.coefficient);
    put(r, "chain_holds", rep.chain_holds);
    put(r, "positivity_lost_at", tr.flags.positivity_lost);
    put(r, "monotone_decay", tr.flags.monotone_decay);

    run.check(
        "positivity",
        tr.flags.positivity_lost.is_none(),
        tr.flags.positivity_lost.map_or("kept".into(), |t| format!("lost at t = {t:.4}")),
    );
    run.check("chain", rep.chain_holds, format!("coefficient {:.4} <= -0.25", rep.coefficient));
    match (rep.a_l2, rep.a_sup) {
        (Some(al2), Some(asup)) => {
            let bound = sup_rate_bound(n);
            run.check("decay_l2", al2 >= 0.25, format!("a_L2 {al2:.4} >= 0.25"));
            run.check("decay_sup", asup >= bound, format!("a_sup {asup:.4} >= {bound:.4}"));
        }
        _ => run.check("decay_fit", false, rep.fit_error.clone().unwrap_or_default()),
    }
    if let Some(res) = rep.residual {
        run.check(
            "pointwise_inequality",
            res.passes(1e-3),
            format!("{:.2e} <= 1e-3 * {:.2e}", res.max_residual, res.scale),
        );
    }
    if let Some(k) = rep.kato {
        run.check("kato", k.passes(), format!("{:.2e} <= {:.2e}", k.max_violation.max(0.0), k.slack));
    }
    Ok(run)
}

fn spectrum(bg: &Arc<BackgroundGeometry>) -> Result<Run, ExperimentError> {
    let est = lambda0_estimate(bg)?;
    let c = bg.chart();
    let floor = (c.n * c.n) as f64 / 4.0;
    let exact = (c.mode == Mode::Torus && bg.kind() == Background::Hyperbolic).then(|| {
        let l = c.s1 - c.s0;
        floor + (std::f64::consts::PI / l).powi(2)
    });
    let mut run = Run::new();
    run.rows = vec![SeriesRow { lambda0: Some(est.value), ..SeriesRow::at(0.0) }];
    let r = &mut run.result;
    put(r, "lambda0", est.value);
    put(r, "iterations", est.iterations);
    put(r, "lee_bound", floor);
    put(r, "lambda0_exact", exact);
    run.check("lee_bound", est.value >= 0.99 * floor, format!("{:.5} >= 0.99 * {floor}", est.value));
    if let Some(e) = exact {
        let rel = (est.value - e).abs() / e;
        run.check("exact_value", rel <= 1e-2, format!("relative error {rel:.2e}"));
    }
    Ok(run)
}
