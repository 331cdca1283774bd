//! Exponential-rate fits and the constant bookkeeping of the energy estimate.

use crate::error::{FlowError, Result};
use crate::flow::stepper::{FlowTrace, ROUNDOFF_FLOOR};

/// Default fit window in normalized time.
pub const DEFAULT_WINDOW: (f64, f64) = (1.0, 5.0);
pub const MIN_FIT_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `-d/dt log F`
    pub a_l2: f64,
    /// `-d/dt log sup |Z|_h`
    pub a_sup: f64,
    pub samples: usize,
    /// Last sample time used; earlier than the window end when `Z` hits roundoff.
    pub t_end: f64,
}

/// Least-squares slope of `ys` against `ts`.
pub fn ls_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(ys) {
        num += (t - tm) * (y - ym);
        den += (t - tm) * (t - tm);
    }
    num / den
}

pub fn decay_fit(trace: &FlowTrace, window: (f64, f64)) -> Result<DecayFit> {
    let tol = 1e-9 * window.1.abs().max(1.0);
    let inside: Vec<_> = trace
        .samples
        .iter()
        .filter(|s| s.t >= window.0 - tol && s.t <= window.1 + tol)
        .take_while(|s| s.sup_z > ROUNDOFF_FLOOR)
        .collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(FlowError::FitRejected(format!(
            "{} samples in [{}, {}], need {MIN_FIT_SAMPLES}",
            inside.len(),
            window.0,
            window.1
        )));
    }
    if inside.windows(2).any(|w| w[1].energy > w[0].energy) {
        return Err(FlowError::FitRejected(format!(
            "F is not decreasing on [{}, {}]",
            window.0, window.1
        )));
    }
    if inside.iter().any(|s| !(s.energy > 0.0 && s.sup_z > 0.0)) {
        return Err(FlowError::FitRejected("F or sup|Z| vanishes in the window".into()));
    }
    let ts: Vec<f64> = inside.iter().map(|s| s.t).collect();
    let lf: Vec<f64> = inside.iter().map(|s| s.energy.ln()).collect();
    let lz: Vec<f64> = inside.iter().map(|s| s.sup_z.ln()).collect();
    Ok(DecayFit {
        a_l2: -ls_slope(&ts, &lf),
        a_sup: -ls_slope(&ts, &lz),
        samples: inside.len(),
        t_end: ts[ts.len() - 1],
    })
}

/// Admissibility threshold `eta(n) = 1 / (8 b_n)`.
pub fn eta_threshold(b_n: f64) -> f64 {
    1.0 / (8.0 * b_n)
}

/// `-n^2/2 + eps + 4 + b eta`, the coefficient of `F` in the energy estimate.
pub fn energy_coefficient(n: usize, epsilon: f64, b_eta: f64) -> f64 {
    -((n * n) as f64) / 2.0 + epsilon + 4.0 + b_eta
}

/// The chain `eps < 1/8`, `b eta < 1/8`, `n >= 3` giving a coefficient `<= -1/4`.
pub fn coefficient_chain_holds(n: usize, epsilon: f64, b_eta: f64) -> bool {
    n >= 3 && epsilon < 0.125 && b_eta < 0.125 && energy_coefficient(n, epsilon, b_eta) <= -0.25
}

/// Rate of the sup-norm decay claimed for dimension `n`.
pub fn sup_rate_bound(n: usize) -> f64 {
    1.0 / (4.0 * (n + 3) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let ts = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 - 0.5 * t).collect();
        assert!((ls_slope(&ts, &ys) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn constants() {
        assert_eq!(eta_threshold(1.0), 0.125);
        assert!((sup_rate_bound(3) - 1.0 / 24.0).abs() < 1e-15);
        assert!(coefficient_chain_holds(3, 0.12, 0.12));
        assert!(!coefficient_chain_holds(2, 0.0, 0.0));
        assert!(!coefficient_chain_holds(3, 0.2, 0.0));
        for n in 3..8 {
            assert!(energy_coefficient(n, 0.125, 0.125) <= -0.25);
        }
    }
}
