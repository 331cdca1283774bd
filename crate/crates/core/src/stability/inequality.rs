//! Pointwise evolution inequality for `|Z|^2`, Kato's inequality and the
//! curvature term of the `|Z|^2` evolution.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{FlowError, Result};
use crate::flow::operator::covariant_derivs;
use crate::flow::stepper::FlowTrace;
use crate::geometry::jet::{i2, i4, mat_mul, rcc, Jet};
use crate::geometry::tensor::expand_into;
use crate::geometry::state::perturbation_derivs;
use crate::geometry::stencil::SClosure;
use crate::geometry::{MetricState, ScalarField, ZeroFrameTensor};

use super::energy::z_norm_sq;
use super::scalar::{contract, pair, scalar_jet};

/// Nodes with `|Z|_h` below this are skipped by the Kato check.
pub const KATO_ZERO: f64 = 1e-12;
/// Kato slack is `KATO_SLACK * ds^2 * max |D Z|_h^2`.
pub const KATO_SLACK: f64 = 10.0;

/// `|D Z|_h^2` at every node, with `D` the background connection.
pub fn grad_norm_sq(v: &ZeroFrameTensor, g: &MetricState, closure: SClosure) -> Vec<f64> {
    let c = *v.chart();
    let d = c.dim();
    (0..c.nodes())
        .into_par_iter()
        .map(|node| {
            let (ix, iy) = c.node_coords(node);
            let geo = g.bg.node(node);
            let vj = Jet::from_frame(&c, ix, &perturbation_derivs(v, ix, iy, closure));
            let d1 = covariant_derivs(geo, &vj).d1;
            let hinv = geo.hinv();
            // raise every slot with h^{-1}
            let mut s = 0.0;
            for m in 0..d {
                for mm in 0..d {
                    let hm = hinv[i2(d, m, mm)];
                    if hm == 0.0 {
                        continue;
                    }
                    let a = &d1[m * d * d..(m + 1) * d * d];
                    let b = &d1[mm * d * d..(mm + 1) * d * d];
                    let ab = mat_mul(d, &mat_mul(d, hinv, a), hinv);
                    let mut t = 0.0;
                    for k in 0..d * d {
                        t += ab[k] * b[k];
                    }
                    s += hm * t;
                }
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityParams {
    pub epsilon: f64,
    /// The product `b(n) eta`.
    pub b_eta: f64,
    pub closure: SClosure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InequalityReport {
    /// Largest `r = d_t|Z|^2 - [g^{ij} D_i D_j |Z|^2 - (2 - eps)|DZ|^2 + (4 + eps + b eta)|Z|^2]`.
    pub max_residual: f64,
    /// Largest sum of the absolute values of the terms at a node.
    pub scale: f64,
    pub triplets: usize,
}

impl InequalityReport {
    pub fn passes(&self, slack: f64) -> bool {
        self.max_residual <= slack * self.scale
    }
}

/// Evaluates the inequality on each stored snapshot triplet; `d_t` is the
/// centred difference of the outer snapshots.
pub fn pointwise_inequality_residual(trace: &FlowTrace, p: InequalityParams) -> Result<InequalityReport> {
    let trip = trace.triplets();
    if trip.is_empty() {
        return Err(FlowError::Precondition(
            "pointwise inequality needs snapshot triplets (set snapshot_every)".into(),
        ));
    }
    let base = &trace.final_state;
    let c = *base.chart();
    let d = c.dim();
    // Dirichlet end nodes carry boundary data and are not evolved.
    let dirichlet = p.closure == SClosure::OneSided;
    let mut rep = InequalityReport { max_residual: f64::NEG_INFINITY, triplets: trip.len(), ..Default::default() };
    for (before, centre, after) in trip {
        let gb = base.with_perturbation(before.v.clone());
        let gc = base.with_perturbation(centre.v.clone());
        let ga = base.with_perturbation(after.v.clone());
        let zb = z_norm_sq(&gb);
        let za = z_norm_sq(&ga);
        let zc = z_norm_sq(&gc);
        let zf = ScalarField::from_data(c, zc.clone());
        let grad2 = grad_norm_sq(&gc.v, &gc, p.closure);
        let span = after.t - before.t;
        for node in 0..c.nodes() {
            let (ix, iy) = c.node_coords(node);
            if dirichlet && (ix == 0 || ix + 1 == c.nx) {
                continue;
            }
            let geo = gc.bg.node(node);
            let g = gc.g_comps(node);
            let mut gm = vec![0.0; d * d];
            expand_into(&c, &g, &mut gm);
            let ginv = gc.g_inverse(node, &gm)?;
            let sj = scalar_jet(&c, geo, ix, iy, p.closure, &zf);
            let lap = contract(d, &ginv, &sj.hess);
            let dtz = (za[node] - zb[node]) / span;
            let grad_term = (2.0 - p.epsilon) * grad2[node];
            let zero_term = (4.0 + p.epsilon + p.b_eta) * zc[node];
            let r = dtz - (lap - grad_term + zero_term);
            rep.max_residual = rep.max_residual.max(r);
            rep.scale = rep.scale.max(dtz.abs() + lap.abs() + grad_term + zero_term);
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KatoReport {
    /// Largest `|D|Z||^2 - |DZ|^2` over evaluated nodes.
    pub max_violation: f64,
    /// Largest `|DZ|^2`.
    pub scale: f64,
    pub slack: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl KatoReport {
    pub fn passes(&self) -> bool {
        self.evaluated == 0 || self.max_violation <= self.slack
    }

    pub fn merge(self, o: KatoReport) -> KatoReport {
        KatoReport {
            max_violation: self.max_violation.max(o.max_violation),
            scale: self.scale.max(o.scale),
            slack: self.slack.max(o.slack),
            evaluated: self.evaluated + o.evaluated,
            skipped: self.skipped + o.skipped,
        }
    }
}

/// Compares the stencil gradient of `|Z|_h` with `|DZ|_h` node by node.
pub fn kato_check(g: &MetricState, closure: SClosure) -> KatoReport {
    let c = *g.chart();
    let d = c.dim();
    let zabs: Vec<f64> = z_norm_sq(g).into_iter().map(|z| z.max(0.0).sqrt()).collect();
    let zf = ScalarField::from_data(c, zabs.clone());
    let grad2 = grad_norm_sq(&g.v, g, closure);
    let mut rep = KatoReport { max_violation: f64::NEG_INFINITY, ..Default::default() };
    for node in 0..c.nodes() {
        rep.scale = rep.scale.max(grad2[node]);
        if zabs[node] < KATO_ZERO {
            rep.skipped += 1;
            continue;
        }
        let (ix, iy) = c.node_coords(node);
        let geo = g.bg.node(node);
        let sj = scalar_jet(&c, geo, ix, iy, closure, &zf);
        let lhs = pair(d, geo.hinv(), &sj.grad, &sj.grad);
        rep.max_violation = rep.max_violation.max(lhs - grad2[node]);
        rep.evaluated += 1;
    }
    rep.slack = KATO_SLACK * c.ds() * c.ds() * rep.scale;
    rep
}

/// Kato over every stored snapshot of a trace (and its final state).
pub fn kato_check_trace(trace: &FlowTrace, closure: SClosure) -> KatoReport {
    let base = &trace.final_state;
    trace
        .snapshots
        .iter()
        .map(|s| kato_check(&base.with_perturbation(s.v.clone()), closure))
        .fold(kato_check(base, closure), KatoReport::merge)
}

/// `max_nodes |4 sum_{i != j} l_i / l_j (l_i - 1)(l_j - 1) E_ijji| / |Z|_h^2`,
/// where `l_i` are the eigenvalues of `g` relative to `h`, `e_i` the
/// `h`-orthonormal eigenvectors and `E = R + R^cc` of the background.
pub fn curvature_term_bound(g: &MetricState) -> f64 {
    let c = *g.chart();
    let d = c.dim();
    let z2 = z_norm_sq(g);
    let mut worst: f64 = 0.0;
    for node in 0..c.nodes() {
        if z2[node] < 1e-24 {
            continue;
        }
        let geo = g.bg.node(node);
        let cc = rcc(&geo.h, d);
        let e4: Vec<f64> = geo.riemann.iter().zip(&cc).map(|(a, b)| a + b).collect();
        let h = DMatrix::from_row_slice(d, d, &geo.h);
        let Some(chol) = h.cholesky() else { continue };
        let Some(linv) = chol.l().try_inverse() else { continue };
        let mut gm = vec![0.0; d * d];
        expand_into(&c, &g.g_comps(node), &mut gm);
        let m = &linv * DMatrix::from_row_slice(d, d, &gm) * linv.transpose();
        let eig = SymmetricEigen::new((&m + m.transpose()) * 0.5);
        let basis = linv.transpose() * &eig.eigenvectors;
        let mut term = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let (li, lj) = (eig.eigenvalues[i], eig.eigenvalues[j]);
                let mut eijji = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        for p in 0..d {
                            for q in 0..d {
                                eijji += e4[i4(d, a, b, p, q)]
                                    * basis[(a, i)]
                                    * basis[(b, j)]
                                    * basis[(p, j)]
                                    * basis[(q, i)];
                            }
                        }
                    }
                }
                term += li / lj * (li - 1.0) * (lj - 1.0) * eijji;
            }
        }
        worst = worst.max((4.0 * term).abs() / z2[node]);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_background, perturb, CollarChart};

    #[test]
    fn pure_trace_is_the_kato_equality_case() {
        let g = build_background(CollarChart::torus(3, 1e-3, 0.5, 64).unwrap()).unwrap();
        let v = ZeroFrameTensor::pure_trace(*g.chart(), |x, _| 0.05 * x * (0.5 - x) + 0.01 * x);
        let g = g.with_perturbation(v);
        let k = kato_check(&g, SClosure::OneSided);
        assert!(k.evaluated > 0);
        assert!(k.max_violation.abs() <= 1e-12 * k.scale.max(1e-30), "{k:?}");
    }

    #[test]
    fn kato_holds_for_random_fields() {
        let g = build_background(CollarChart::torus(3, 1e-3, 0.5, 96).unwrap()).unwrap();
        for seed in 0..4 {
            let v = perturb::random_smooth(&g.bg, 0.01, seed);
            let k = kato_check(&g.with_perturbation(v), SClosure::OneSided);
            assert!(k.passes(), "{k:?}");
        }
        let zero = kato_check(&g, SClosure::OneSided);
        assert_eq!(zero.evaluated, 0);
        assert!(zero.passes());
    }

    #[test]
    fn curvature_term_vanishes_on_hyperbolic_space() {
        let g = build_background(CollarChart::torus(3, 1e-3, 0.5, 32).unwrap()).unwrap();
        let v = perturb::random_smooth(&g.bg, 0.05, 3);
        assert!(curvature_term_bound(&g.with_perturbation(v)) < 1e-9);
    }
}
