use super::jet::{self, i2, mat_mul};
use crate::error::{FlowError, Result};

/// Three-term expansion of `(h + v)^{-1}` about `h^{-1}`.
#[derive(Debug, Clone)]
pub struct InverseExpansion {
    /// `(h + v)^{-1}` by dense inversion.
    pub inverse: Vec<f64>,
    /// `h^{ab} - h^{al} h^{bm} v_ml`
    pub first_order: Vec<f64>,
    /// `(h + v)^{bl} h^{am} h^{pq} v_lp v_mq`
    pub remainder: Vec<f64>,
    /// `max |inverse - (first_order + remainder)| / max |inverse|`
    pub identity_error: f64,
}

/// Expands the inverse of `h + v` (both `dim x dim`, row-major).
pub fn inverse_expansion(dim: usize, h: &[f64], v: &[f64]) -> Result<InverseExpansion> {
    let d = dim;
    let singular = |what: &str| FlowError::SingularMetric {
        ix: 0,
        iy: 0,
        x: f64::NAN,
        y: f64::NAN,
        detail: format!("{what} is not invertible"),
    };
    let hinv = jet::invert(d, h).ok_or_else(|| singular("h"))?;
    let g: Vec<f64> = h.iter().zip(v).map(|(a, b)| a + b).collect();
    let inverse = jet::invert(d, &g).ok_or_else(|| singular("h + v"))?;

    let hv = mat_mul(d, &hinv, v);
    let hvh = mat_mul(d, &hv, &hinv);
    let first_order: Vec<f64> = hinv.iter().zip(&hvh).map(|(a, b)| a - b).collect();
    let hvhv = mat_mul(d, &hvh, v);
    let remainder = mat_mul(d, &hvhv, &inverse);

    let scale = inverse.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut err: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let k = i2(d, i, j);
            err = err.max((inverse[k] - first_order[k] - remainder[k]).abs());
        }
    }
    Ok(InverseExpansion {
        inverse,
        first_order,
        remainder,
        identity_error: err / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let e = inverse_expansion(1, &[1.0], &[0.3]).unwrap();
        assert!((e.first_order[0] - 0.7).abs() < 1e-15);
        assert!((e.remainder[0] - 0.09 / 1.3).abs() < 1e-15);
        assert!((e.inverse[0] - 1.0 / 1.3).abs() < 1e-15);
        assert!(e.identity_error < 1e-15);
    }

    #[test]
    fn zero_perturbation() {
        let h = [2.0, 0.5, 0.5, 1.0];
        let e = inverse_expansion(2, &h, &[0.0; 4]).unwrap();
        for k in 0..4 {
            assert_eq!(e.remainder[k], 0.0);
            assert!((e.first_order[k] - e.inverse[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_sum_is_an_error() {
        assert!(inverse_expansion(1, &[1.0], &[-1.0]).is_err());
    }
}
