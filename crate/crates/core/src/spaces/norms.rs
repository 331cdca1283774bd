//! Discrete estimators for the weighted anisotropic 0-Hoelder norms.

use crate::error::Result;
use crate::geometry::stencil::{node_derivs, SClosure};
use crate::geometry::{ScalarField, ZeroFrameTensor};

use super::derivative::{b_derivative, zero_derivative, ZeroDirection};
use super::whitney::{whitney_cover, y_distance, WhitneyCover};

/// Ratio of the weighted sup near `x_min` to the sup elsewhere above which a
/// field is flagged as growing into the boundary.
const GROWTH_FLAG_RATIO: f64 = 1.2;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormReport {
    pub nu: f64,
    pub a: f64,
    /// `sup x^{-nu} |u|`
    pub weighted_sup: f64,
    /// Spatial Hoelder seminorm of `x^{-nu} u` over in-ball pairs.
    pub holder_seminorm: Option<f64>,
    /// Time Hoelder seminorm over stored sample pairs.
    pub time_seminorm: Option<f64>,
    /// `zero_derivative_norms[j]`: largest weighted sup of a 0-derivative of order `j`.
    pub zero_derivative_norms: Vec<f64>,
    /// `b_derivative_norms[s] = sup x^{-nu} |d_y^s u|`.
    pub b_derivative_norms: Vec<f64>,
    /// The weighted profile grows into `x_min`.
    pub unbounded: bool,
}

impl NormReport {
    pub fn is_finite(&self) -> bool {
        self.weighted_sup.is_finite()
            && self.holder_seminorm.is_none_or(f64::is_finite)
            && self.time_seminorm.is_none_or(f64::is_finite)
            && self.zero_derivative_norms.iter().all(|v| v.is_finite())
            && self.b_derivative_norms.iter().all(|v| v.is_finite())
    }

    /// Sum of every present entry: a single "C^k" style size.
    pub fn total(&self) -> f64 {
        self.weighted_sup
            + self.holder_seminorm.unwrap_or(0.0)
            + self.zero_derivative_norms.iter().skip(1).sum::<f64>()
    }
}

fn weighted(u: &ScalarField, nu: f64) -> ScalarField {
    let c = *u.chart();
    let mut w = u.clone();
    for ix in 0..c.nx {
        let f = c.x(ix).powf(-nu);
        for iy in 0..c.ny {
            w.data_mut()[c.node(ix, iy)] *= f;
        }
    }
    w
}

fn sup_abs(u: &ScalarField) -> f64 {
    u.data().iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// `sup x^{-nu} |u|`
pub fn weighted_sup(u: &ScalarField, nu: f64) -> f64 {
    sup_abs(&weighted(u, nu))
}

/// Growth test on the layer maxima of `w = x^{-nu} u`: flags when the layers
/// within one e-fold of `x_min` exceed the rest by `GROWTH_FLAG_RATIO`.
fn grows_into_boundary(w: &ScalarField) -> bool {
    let c = *w.chart();
    let (mut near, mut far) = (0.0_f64, 0.0_f64);
    let edge = c.x_min() * std::f64::consts::E;
    for ix in 0..c.nx {
        let m = (0..c.ny).fold(0.0_f64, |m, iy| m.max(w.get(ix, iy).abs()));
        if c.x(ix) < edge {
            near = near.max(m);
        } else {
            far = far.max(m);
        }
    }
    far > 0.0 && near > GROWTH_FLAG_RATIO * far
}

/// `max (x + x')^a |w - w'| / (|x - x'|^a + |y - y'|^a)` over pairs inside a ball.
pub fn holder_seminorm(w: &ScalarField, a: f64, cover: &WhitneyCover) -> f64 {
    let c = *w.chart();
    let mut best: f64 = 0.0;
    for members in &cover.members {
        for (k, &p) in members.iter().enumerate() {
            let (ixp, iyp) = c.node_coords(p);
            let (xp, yp) = (c.x(ixp), c.y(iyp));
            let wp = w.data()[p];
            for &q in &members[k + 1..] {
                let (ixq, iyq) = c.node_coords(q);
                let (xq, yq) = (c.x(ixq), c.y(iyq));
                let den = (xp - xq).abs().powf(a) + y_distance(yp, yq).powf(a);
                if den == 0.0 {
                    continue;
                }
                best = best.max((xp + xq).powf(a) * (wp - w.data()[q]).abs() / den);
            }
        }
    }
    best
}

/// `max |w(t) - w(t')| / |t - t'|^{a/2}` over nodes and stored sample pairs.
pub fn time_seminorm(samples: &[(f64, ScalarField)], nu: f64, a: f64) -> f64 {
    let ws: Vec<(f64, ScalarField)> = samples.iter().map(|(t, u)| (*t, weighted(u, nu))).collect();
    let mut best: f64 = 0.0;
    for i in 0..ws.len() {
        for j in (i + 1)..ws.len() {
            let dt = (ws[i].0 - ws[j].0).abs();
            if dt == 0.0 {
                continue;
            }
            let diff = ws[i]
                .1
                .data()
                .iter()
                .zip(ws[j].1.data())
                .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
            best = best.max(diff / dt.powf(0.5 * a));
        }
    }
    best
}

/// Largest weighted sup among all 0-derivatives of each order `0..=k` (k <= 2).
fn zero_derivative_norms(w: &ScalarField, k: usize) -> Vec<f64> {
    let mut out = vec![sup_abs(w)];
    if k == 0 {
        return out;
    }
    let dn = zero_derivative(w, ZeroDirection::Normal);
    let dt = zero_derivative(w, ZeroDirection::Tangential);
    out.push(sup_abs(&dn).max(sup_abs(&dt)));
    if k >= 2 {
        let nn = zero_derivative(&dn, ZeroDirection::Normal);
        let nt = zero_derivative(&dn, ZeroDirection::Tangential);
        let tt = zero_derivative(&dt, ZeroDirection::Tangential);
        out.push(sup_abs(&nn).max(sup_abs(&nt)).max(sup_abs(&tt)));
    }
    out
}

/// Weighted 0-Hoelder report of a scalar field (`0 < a < 1`, `k <= 2`).
pub fn weighted_holder_norm(u: &ScalarField, nu: f64, a: f64, k: usize) -> NormReport {
    let cover = whitney_cover(u.chart());
    weighted_holder_norm_with(u, nu, a, k, &cover)
}

pub fn weighted_holder_norm_with(
    u: &ScalarField,
    nu: f64,
    a: f64,
    k: usize,
    cover: &WhitneyCover,
) -> NormReport {
    let w = weighted(u, nu);
    NormReport {
        nu,
        a,
        weighted_sup: sup_abs(&w),
        holder_seminorm: Some(holder_seminorm(&w, a, cover)),
        time_seminorm: None,
        zero_derivative_norms: zero_derivative_norms(&w, k.min(2)),
        b_derivative_norms: Vec::new(),
        unbounded: grows_into_boundary(&w),
    }
}

/// Component-wise maximum of the scalar reports of a tensor field.
pub fn tensor_holder_norm(v: &ZeroFrameTensor, nu: f64, a: f64, k: usize) -> NormReport {
    let cover = whitney_cover(v.chart());
    let reports: Vec<NormReport> = (0..v.ncomp())
        .map(|c| weighted_holder_norm_with(&ScalarField::component(v, c), nu, a, k, &cover))
        .collect();
    merge(reports)
}

/// Cheap report holding only the weighted sup and first-order 0-derivative norms.
pub fn tensor_sup_report(v: &ZeroFrameTensor, nu: f64) -> NormReport {
    let reports: Vec<NormReport> = (0..v.ncomp())
        .map(|c| {
            let w = weighted(&ScalarField::component(v, c), nu);
            NormReport {
                nu,
                weighted_sup: sup_abs(&w),
                zero_derivative_norms: zero_derivative_norms(&w, 1),
                unbounded: grows_into_boundary(&w),
                ..Default::default()
            }
        })
        .collect();
    merge(reports)
}

fn merge(reports: Vec<NormReport>) -> NormReport {
    let mut out = NormReport {
        nu: reports[0].nu,
        a: reports[0].a,
        ..Default::default()
    };
    let maxvec = |a: &mut Vec<f64>, b: &[f64]| {
        if a.len() < b.len() {
            a.resize(b.len(), 0.0);
        }
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.max(*y);
        }
    };
    for r in &reports {
        out.weighted_sup = out.weighted_sup.max(r.weighted_sup);
        out.holder_seminorm = match (out.holder_seminorm, r.holder_seminorm) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        maxvec(&mut out.zero_derivative_norms, &r.zero_derivative_norms);
        maxvec(&mut out.b_derivative_norms, &r.b_derivative_norms);
        out.unbounded |= r.unbounded;
    }
    out
}

/// Weighted norms of `d_y^s v` for `s <= l` (one_tangential charts).
pub fn tangential_regularity_report(v: &ZeroFrameTensor, l: usize, nu: f64) -> Result<NormReport> {
    let mut norms = vec![0.0_f64; l + 1];
    for c in 0..v.ncomp() {
        let u = ScalarField::component(v, c);
        for (s, slot) in norms.iter_mut().enumerate() {
            *slot = slot.max(weighted_sup(&b_derivative(&u, s)?, nu));
        }
    }
    Ok(NormReport {
        nu,
        weighted_sup: norms[0],
        b_derivative_norms: norms,
        ..Default::default()
    })
}

/// Discrete `C^2` size of a tensor field: the largest sum over components of
/// `|w|` and its first and second 0-derivatives, `w = x^{-nu} v`.
pub fn c2_norm(v: &ZeroFrameTensor, nu: f64) -> f64 {
    let c = *v.chart();
    let mut best: f64 = 0.0;
    for ix in 0..c.nx {
        let x = c.x(ix);
        let wgt = x.powf(-nu);
        for iy in 0..c.ny {
            let mut s = 0.0;
            for k in 0..c.ncomp() {
                let d = node_derivs(&c, ix, iy, SClosure::OneSided, |i, j| v.get(i, j, k));
                s += wgt
                    * (d.v.abs()
                        + d.s.abs()
                        + (x * d.y).abs()
                        + d.ss.abs()
                        + (x * d.sy).abs()
                        + (x * x * d.yy).abs());
            }
            best = best.max(s);
        }
    }
    best
}

/// `max_t` of `c2_norm` along a path.
pub fn path_c2_norm(path: &[ZeroFrameTensor], nu: f64) -> f64 {
    path.iter().fold(0.0, |m: f64, v| m.max(c2_norm(v, nu)))
}

/// `max_t sup x^{-nu} |v|` over components along a path.
pub fn path_weighted_sup(path: &[ZeroFrameTensor], nu: f64) -> f64 {
    path.iter().fold(0.0, |m: f64, v| m.max(tensor_weighted_sup(v, nu)))
}

pub fn tensor_weighted_sup(v: &ZeroFrameTensor, nu: f64) -> f64 {
    (0..v.ncomp()).fold(0.0, |m: f64, c| {
        m.max(weighted_sup(&ScalarField::component(v, c), nu))
    })
}

/// True when a sequence of values from successively refined meshes keeps
/// growing by more than `ratio` per refinement.
pub fn refinement_unbounded(values: &[f64], ratio: f64) -> bool {
    values.len() >= 2 && values.windows(2).all(|w| w[1] > ratio * w[0])
}
