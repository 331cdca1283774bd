//! Picard iteration `v <- H(2E + Q(v))` for the conditioned equation.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FlowError, Result};
use crate::flow::operator::{quadratic_part, rhs_and_linear};
use crate::flow::stepper::{run_flow, Boundary, FlowConfig, Scheme};
use crate::geometry::{perturb, BackgroundGeometry, MetricState, ZeroFrameTensor};
use crate::spaces::{c2_norm, path_c2_norm, path_weighted_sup};

use super::heat::HeatPropagator;

/// Number of random pairs behind each contraction estimate.
pub const CONTRACTION_PAIRS: usize = 8;
pub const CONTRACTION_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub dt: f64,
    pub t_final: f64,
    pub boundary: Boundary,
    /// Stop when `|v_{k+1} - v_k| <= tol * |v_{k+1}|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the Schauder-ratio norms.
    pub nu: f64,
    /// Also run direct IMEX stepping and record the difference at `t_final`.
    pub compare_direct: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            dt: 1e-3,
            t_final: 0.1,
            boundary: Boundary::Dirichlet,
            tol: 1e-10,
            max_iter: 30,
            nu: 1.0,
            compare_direct: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DuhamelReport {
    /// Discrete `C^2` size of each iterate path.
    pub iterate_norms: Vec<f64>,
    /// `|v_{k+1} - v_k|` in the same norm.
    pub diff_norms: Vec<f64>,
    /// Largest ratio of successive differences above the roundoff floor.
    pub kappa_hat: f64,
    /// `|u|_{x^nu C^2} / |f|_{x^nu C^0}` for the final iterate.
    pub schauder_ratio: f64,
    /// `sup |v_Picard(T) - v_direct(T)|`.
    pub residual_vs_direct: Option<f64>,
    /// `(dt + ds^2) T sup |f|` with `f` the final source path.
    pub truncation_estimate: f64,
    pub converged: bool,
}

impl DuhamelReport {
    pub fn iterations(&self) -> usize {
        self.diff_norms.len()
    }

    /// Successive differences shrink at every recorded step.
    pub fn geometric_decrease(&self) -> bool {
        self.ratios().iter().all(|r| *r < 1.0)
    }

    /// Ratios `d_{k+1} / d_k` while `d_k` sits above the roundoff floor.
    pub fn ratios(&self) -> Vec<f64> {
        let scale = self.iterate_norms.iter().fold(0.0_f64, |m, v| m.max(*v));
        let floor = 1e-11 * scale.max(f64::MIN_POSITIVE);
        self.diff_norms
            .windows(2)
            .filter(|w| w[0] > floor && w[1] > floor)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Source `2E + Q(v) = rhs(v) - L v` along a path.
fn sources(bg: &Arc<BackgroundGeometry>, path: &[ZeroFrameTensor], boundary: Boundary) -> Result<Vec<ZeroFrameTensor>> {
    let base = MetricState::unperturbed(bg.clone());
    path[..path.len() - 1]
        .iter()
        .map(|v| {
            let (rhs, lv) = rhs_and_linear(&base.with_perturbation(v.clone()), boundary.closure())?;
            Ok(rhs.sub(&lv))
        })
        .collect()
}

/// Iterates `v_{k+1} = H(2E + Q(v_k))` from `v_0 = 0`; returns the final path.
pub fn picard_solve(
    bg: Arc<BackgroundGeometry>,
    cfg: &PicardConfig,
) -> Result<(Vec<ZeroFrameTensor>, DuhamelReport)> {
    let a = HeatPropagator::new(&bg, cfg.boundary, cfg.dt)?;
    let steps = a.steps_for(cfg.t_final).max(1);
    let chart = *bg.chart();
    let mut path = vec![ZeroFrameTensor::zeros(chart); steps + 1];
    let mut report = DuhamelReport::default();
    let mut f = Vec::new();

    for _ in 0..cfg.max_iter.max(1) {
        f = sources(&bg, &path, cfg.boundary)?;
        let next = a.convolve(&f)?;
        let diff: Vec<ZeroFrameTensor> = next.iter().zip(&path).map(|(u, v)| u.sub(v)).collect();
        let dn = path_c2_norm(&diff, 0.0);
        let un = path_c2_norm(&next, 0.0);
        report.iterate_norms.push(un);
        report.diff_norms.push(dn);
        path = next;
        report.kappa_hat = report.ratios().iter().fold(0.0_f64, |m, r| m.max(*r));
        if !(dn.is_finite() && un.is_finite()) || report.kappa_hat >= 1.0 {
            return Err(FlowError::Divergence {
                kappa: report.kappa_hat,
                report: Box::new(report),
            });
        }
        if dn <= cfg.tol * un || dn == 0.0 {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        return Err(FlowError::NoConvergence {
            iterations: report.iterations(),
        });
    }

    let fsup = path_weighted_sup(&f, cfg.nu);
    report.schauder_ratio = if fsup > 0.0 {
        path_c2_norm(&path, cfg.nu) / fsup
    } else {
        0.0
    };
    let ds = chart.ds();
    report.truncation_estimate =
        (cfg.dt + ds * ds) * cfg.t_final * path_weighted_sup(&f, 0.0);

    if cfg.compare_direct {
        let flow = FlowConfig {
            dt: cfg.dt,
            t_final: steps as f64 * cfg.dt,
            scheme: Scheme::ImexBackwardEuler,
            boundary: cfg.boundary,
            epsilon_close: f64::INFINITY,
            sample_every: steps,
            snapshot_every: None,
            nu: 0.0,
        };
        let tr = run_flow(&MetricState::unperturbed(bg.clone()), &flow)?;
        let last = path.last().expect("path has t = 0");
        report.residual_vs_direct = Some(tr.final_state.v.sub(last).max_abs());
    }
    Ok((path, report))
}

/// `kappa_hat = max |Psi u - Psi v| / |u - v|` over random time-independent
/// pairs of sup-size `mu`, with `Psi w = H(2E + Q(w))` on `[0, t_final]`.
pub fn contraction_estimate(
    bg: Arc<BackgroundGeometry>,
    mu: f64,
    t_final: f64,
    dt: f64,
    boundary: Boundary,
    seed: u64,
) -> Result<f64> {
    let a = HeatPropagator::new(&bg, boundary, dt)?;
    let steps = a.steps_for(t_final).max(1);
    let base = MetricState::unperturbed(bg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kappa: f64 = 0.0;
    for _ in 0..CONTRACTION_PAIRS {
        let u = perturb::random_smooth(&bg, mu, rng.next_u64());
        let v = perturb::random_smooth(&bg, mu, rng.next_u64());
        // E cancels in the difference and H is linear.
        let qu = quadratic_part(&base.with_perturbation(u.clone()), boundary.closure())?;
        let qv = quadratic_part(&base.with_perturbation(v.clone()), boundary.closure())?;
        let dq = qu.sub(&qv);
        let out = a.convolve(&vec![dq; steps])?;
        let den = c2_norm(&u.sub(&v), 0.0);
        if den > 0.0 {
            kappa = kappa.max(path_c2_norm(&out, 0.0) / den);
        }
    }
    Ok(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Background, CollarChart};

    #[test]
    fn einstein_background_is_a_one_step_fixed_point() {
        let c = CollarChart::torus(3, 1e-3, 0.5, 32).unwrap();
        let bg = Arc::new(BackgroundGeometry::hyperbolic(c).unwrap());
        let cfg = PicardConfig { dt: 1e-2, ..Default::default() };
        let (path, rep) = picard_solve(bg, &cfg).unwrap();
        assert_eq!(rep.iterations(), 1);
        assert!(rep.converged);
        assert!(path.iter().all(|v| v.max_abs() < 1e-12));
    }

    #[test]
    fn picard_limit_matches_imex_stepping() {
        let c = CollarChart::torus(3, 1e-2, 0.5, 32).unwrap();
        let bg = Arc::new(BackgroundGeometry::new(c, Background::TangentialRamp { beta: 0.02 }).unwrap());
        let cfg = PicardConfig { dt: 1e-2, t_final: 0.1, ..Default::default() };
        let (_, rep) = picard_solve(bg, &cfg).unwrap();
        assert!(rep.kappa_hat < 1.0);
        assert!(rep.geometric_decrease());
        assert!(rep.residual_vs_direct.unwrap() < 1e-9, "{:?}", rep.residual_vs_direct);
    }
}
