//! Normalized and unnormalized Ricci flow time.
//!
//! `g(tau) = (1 + 2n tau) g_N(t)` with `t = ln(1 + 2n tau) / (2n)`.

use super::stepper::FlowTrace;

/// Unnormalized time `tau` for normalized time `t`.
pub fn unnormalized_time(t: f64, n: usize) -> f64 {
    let k = 2.0 * n as f64;
    (k * t).exp_m1() / k
}

/// Normalized time `t` for unnormalized time `tau`.
pub fn normalized_time(tau: f64, n: usize) -> f64 {
    let k = 2.0 * n as f64;
    (k * tau).ln_1p() / k
}

/// Conformal factor `1 + 2n tau` relating the two solutions.
pub fn scale_factor(tau: f64, n: usize) -> f64 {
    1.0 + 2.0 * n as f64 * tau
}

/// One sample of the unnormalized solution: `g = factor * (h + v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnnormalizedSample {
    pub tau: f64,
    pub factor: f64,
    /// `sup |v|_h` of the normalized metric at the matching time.
    pub sup_z: f64,
}

pub fn unnormalize_time(trace: &FlowTrace, n: usize) -> Vec<UnnormalizedSample> {
    trace
        .samples
        .iter()
        .map(|s| {
            let tau = unnormalized_time(s.t, n);
            UnnormalizedSample {
                tau,
                factor: scale_factor(tau, n),
                sup_z: s.sup_z,
            }
        })
        .collect()
}

/// Inverse of [`unnormalize_time`] on the sample times.
pub fn normalize_time(samples: &[UnnormalizedSample], n: usize) -> Vec<f64> {
    samples.iter().map(|s| normalized_time(s.tau, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero_and_round_trip() {
        assert_eq!(unnormalized_time(0.0, 3), 0.0);
        assert_eq!(scale_factor(0.0, 3), 1.0);
        for n in 2..6 {
            for t in [1e-6, 0.01, 0.3, 1.0, 4.0] {
                let back = normalized_time(unnormalized_time(t, n), n);
                assert!((back - t).abs() <= 1e-12 * t.max(1.0));
            }
        }
    }

    #[test]
    fn hyperbolic_rescaling_solves_ricci_flow() {
        // g(tau) = (1 + 2n tau) h has dg/dtau = 2n h, and Rc(g) = Rc(h) = -n h.
        let n = 3;
        let (tau, e) = (0.4, 1e-6);
        let deriv = (scale_factor(tau + e, n) - scale_factor(tau - e, n)) / (2.0 * e);
        assert!((deriv - 2.0 * n as f64).abs() < 1e-8);
    }
}
