//! Normalized Ricci-DeTurck right-hand side and its conditioned decomposition.
//!
//! In local coordinates at a node the system reads
//!
//! `d_t g_ij = g^{ab} D_a D_b g_ij - 2n g_ij + g^{ab} (g_ip h^{pq} R_jaqb + g_jp h^{pq} R_iaqb) + T3_ij`
//!
//! with `D` the Levi-Civita connection of the background `h`, `R` its curvature
//! and `T3` the quadratic first-derivative terms. Since `D h = 0`, all
//! derivatives act on `v = g - h`.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::background::{BackgroundGeometry, NodeGeometry};
use crate::geometry::jet::{i2, i3, i4, mat_mul, Jet};
use crate::geometry::state::{perturbation_derivs, MetricState};
use crate::geometry::stencil::SClosure;
use crate::geometry::tensor::{project_from, ZeroFrameTensor};

/// First and second background covariant derivatives of `v` at a node.
pub(crate) struct CovDerivs {
    /// `d1[m][i][j] = D_m v_ij`
    pub d1: Vec<f64>,
    /// `d2[a][b][i][j] = D_a D_b v_ij`
    pub d2: Vec<f64>,
}

pub(crate) fn covariant_derivs(geo: &NodeGeometry, v: &Jet) -> CovDerivs {
    let d = v.dim;
    let gam = &geo.conn.gamma;
    let dgam = &geo.conn.dgamma;
    let (vv, dv, ddv) = (&v.g, &v.dg, &v.ddg);

    let mut d1 = vec![0.0; d * d * d];
    for m in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = dv[i3(d, m, i, j)];
                for p in 0..d {
                    s -= gam[i3(d, p, m, i)] * vv[i2(d, p, j)] + gam[i3(d, p, m, j)] * vv[i2(d, i, p)];
                }
                d1[i3(d, m, i, j)] = s;
                d1[i3(d, m, j, i)] = s;
            }
        }
    }

    let mut d2 = vec![0.0; d * d * d * d];
    for a in 0..d {
        for b in 0..d {
            for i in 0..d {
                for j in i..d {
                    // d_a (D_b v_ij)
                    let mut s = ddv[i4(d, a, b, i, j)];
                    for p in 0..d {
                        s -= dgam[i4(d, a, p, b, i)] * vv[i2(d, p, j)]
                            + gam[i3(d, p, b, i)] * dv[i3(d, a, p, j)]
                            + dgam[i4(d, a, p, b, j)] * vv[i2(d, i, p)]
                            + gam[i3(d, p, b, j)] * dv[i3(d, a, i, p)];
                    }
                    for p in 0..d {
                        s -= gam[i3(d, p, a, b)] * d1[i3(d, p, i, j)]
                            + gam[i3(d, p, a, i)] * d1[i3(d, b, p, j)]
                            + gam[i3(d, p, a, j)] * d1[i3(d, b, i, p)];
                    }
                    d2[i4(d, a, b, i, j)] = s;
                    d2[i4(d, a, b, j, i)] = s;
                }
            }
        }
    }
    CovDerivs { d1, d2 }
}

/// `sum_ab w_ab D_a D_b v_ij`
fn contract_d2(d: usize, w: &[f64], d2: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let wab = w[i2(d, a, b)];
            if wab == 0.0 {
                continue;
            }
            let off = i4(d, a, b, 0, 0);
            for k in 0..d * d {
                out[k] += wab * d2[off + k];
            }
        }
    }
    out
}

/// Quadratic first-derivative terms
/// `1/2 g^{ab} g^{pq} (D_i v_pa D_j v_qb + 2 D_a v_jp D_q v_ib - 2 D_a v_jp D_b v_iq
///  - 2 D_j v_pa D_b v_iq - 2 D_i v_pa D_b v_jq)`.
pub(crate) fn t3_term(d: usize, ginv: &[f64], d1: &[f64]) -> Vec<f64> {
    // x[i][q][b] = g^{qp} D_i v_pa g^{ab}
    let mut x = vec![0.0; d * d * d];
    for i in 0..d {
        let di = &d1[i3(d, i, 0, 0)..i3(d, i + 1, 0, 0)];
        let t = mat_mul(d, &mat_mul(d, ginv, di), ginv);
        x[i3(d, i, 0, 0)..i3(d, i + 1, 0, 0)].copy_from_slice(&t);
    }
    // y[b][j][q] = g^{ab} g^{pq} D_a v_jp
    let mut y = vec![0.0; d * d * d];
    for b in 0..d {
        for j in 0..d {
            for q in 0..d {
                let mut s = 0.0;
                for a in 0..d {
                    let gab = ginv[i2(d, a, b)];
                    if gab == 0.0 {
                        continue;
                    }
                    for p in 0..d {
                        s += gab * ginv[i2(d, p, q)] * d1[i3(d, a, j, p)];
                    }
                }
                y[i3(d, b, j, q)] = s;
            }
        }
    }
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let mut s = 0.0;
            for q in 0..d {
                for b in 0..d {
                    s += x[i3(d, i, q, b)] * d1[i3(d, j, q, b)]
                        + 2.0 * y[i3(d, b, j, q)] * (d1[i3(d, q, i, b)] - d1[i3(d, b, i, q)])
                        - 2.0 * x[i3(d, j, q, b)] * d1[i3(d, b, i, q)]
                        - 2.0 * x[i3(d, i, q, b)] * d1[i3(d, b, j, q)];
                }
            }
            out[i2(d, i, j)] = 0.5 * s;
            out[i2(d, j, i)] = 0.5 * s;
        }
    }
    out
}

/// `sum_ab sum_p w_ab m_ip rup[j][a][p][b]`, symmetrized in `(i, j)`.
fn curvature_action(d: usize, w: &[f64], m: &[f64], rup: &[f64]) -> Vec<f64> {
    // k[j][p] = sum_ab w_ab rup[j][a][p][b]
    let mut k = vec![0.0; d * d];
    for j in 0..d {
        for a in 0..d {
            for p in 0..d {
                let mut s = 0.0;
                for b in 0..d {
                    s += w[i2(d, a, b)] * rup[i4(d, j, a, p, b)];
                }
                k[i2(d, j, p)] += s;
            }
        }
    }
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for p in 0..d {
                s += m[i2(d, i, p)] * k[i2(d, j, p)] + m[i2(d, j, p)] * k[i2(d, i, p)];
            }
            out[i2(d, i, j)] = s;
        }
    }
    out
}

/// All pieces of the right-hand side at one node (full matrices).
#[derive(Debug, Clone)]
pub struct NodeTerms {
    pub rhs: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t3: Vec<f64>,
    pub lv: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub e: Vec<f64>,
}

/// Linear operator `L v = h^{ab} D_a D_b v + 2 R(v) - Rc o v - v o Rc - 2n v`
/// at one node, where `R(v)_ij = v^{ab} R_aijb`.
pub(crate) fn node_linear(geo: &NodeGeometry, vj: &Jet, n: usize) -> Vec<f64> {
    let cd = covariant_derivs(geo, vj);
    linear_from(geo, vj, &cd, n)
}

fn linear_from(geo: &NodeGeometry, vj: &Jet, cd: &CovDerivs, n: usize) -> Vec<f64> {
    let d = vj.dim;
    let hinv = geo.hinv();
    let v = &vj.g;
    let mut lv = contract_d2(d, hinv, &cd.d2);
    let vup = mat_mul(d, &mat_mul(d, hinv, v), hinv);
    let vhr = mat_mul(d, &mat_mul(d, v, hinv), &geo.ricci);
    for i in 0..d {
        for j in 0..d {
            let mut ring = 0.0;
            for a in 0..d {
                for b in 0..d {
                    ring += vup[i2(d, a, b)] * geo.riemann[i4(d, a, i, j, b)];
                }
            }
            lv[i2(d, i, j)] += 2.0 * ring - vhr[i2(d, i, j)] - vhr[i2(d, j, i)]
                - 2.0 * n as f64 * v[i2(d, i, j)];
        }
    }
    lv
}

/// Full right-hand side at a node, plus the decomposition when requested.
pub(crate) fn node_terms(
    geo: &NodeGeometry,
    vj: &Jet,
    ginv: &[f64],
    n: usize,
    decompose: bool,
) -> NodeTerms {
    let d = vj.dim;
    let nf = n as f64;
    let hinv = geo.hinv();
    let v = &vj.g;
    let g: Vec<f64> = geo.h.iter().zip(v).map(|(a, b)| a + b).collect();
    let cd = covariant_derivs(geo, vj);

    let lap = contract_d2(d, ginv, &cd.d2);
    let t2 = curvature_action(d, ginv, &g, &geo.rup);
    let t3 = t3_term(d, ginv, &cd.d1);
    let rhs: Vec<f64> = (0..d * d)
        .map(|k| lap[k] - 2.0 * nf * g[k] + t2[k] + t3[k])
        .collect();

    if !decompose {
        return NodeTerms {
            rhs,
            t1: Vec::new(),
            t2,
            t3,
            lv: Vec::new(),
            q1: Vec::new(),
            q2: Vec::new(),
            e: Vec::new(),
        };
    }

    let lv = linear_from(geo, vj, &cd, n);
    // (h+v)^{-1} = h^{-1} - vup + r
    let vup = mat_mul(d, &mat_mul(d, hinv, v), hinv);
    let r = mat_mul(d, &mat_mul(d, &vup, v), ginv);
    let r: Vec<f64> = (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            0.5 * (r[k] + r[i2(d, j, i)])
        })
        .collect();
    let w1: Vec<f64> = (0..d * d).map(|k| r[k] - vup[k]).collect();
    let q1 = contract_d2(d, &w1, &cd.d2);
    let t1 = contract_d2(d, &(0..d * d).map(|k| ginv[k] - hinv[k]).collect::<Vec<_>>(), &cd.d2);
    let minus_vup: Vec<f64> = vup.iter().map(|x| -x).collect();
    let qa = curvature_action(d, &minus_vup, v, &geo.rup);
    let qb = curvature_action(d, &r, &g, &geo.rup);
    let q2: Vec<f64> = qa.iter().zip(&qb).map(|(a, b)| a + b).collect();

    NodeTerms {
        rhs,
        t1,
        t2,
        t3,
        lv,
        q1,
        q2,
        e: geo.einstein_defect.clone(),
    }
}

fn node_jet(state: &MetricState, node: usize, closure: SClosure) -> Jet {
    let c = state.chart();
    let (ix, iy) = c.node_coords(node);
    Jet::from_frame(c, ix, &perturbation_derivs(&state.v, ix, iy, closure))
}

fn project(state: &MetricState, mats: &[Vec<f64>]) -> ZeroFrameTensor {
    let chart = *state.chart();
    let mut out = ZeroFrameTensor::zeros(chart);
    for (node, m) in mats.iter().enumerate() {
        project_from(&chart, m, out.comps_mut(node));
    }
    out
}

/// Right-hand side of the normalized Ricci-DeTurck system at every node.
pub fn rdtf_rhs(state: &MetricState, closure: SClosure) -> Result<ZeroFrameTensor> {
    let n = state.chart().n;
    let mats = (0..state.chart().nodes())
        .into_par_iter()
        .map(|node| {
            let vj = node_jet(state, node, closure);
            let g: Vec<f64> = state.bg.node(node).h.iter().zip(&vj.g).map(|(a, b)| a + b).collect();
            let ginv = state.g_inverse(node, &g)?;
            Ok(node_terms(state.bg.node(node), &vj, &ginv, n, false).rhs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(project(state, &mats))
}

/// Right-hand side and `L v` in one pass (the IMEX explicit part is their difference).
pub fn rhs_and_linear(
    state: &MetricState,
    closure: SClosure,
) -> Result<(ZeroFrameTensor, ZeroFrameTensor)> {
    let n = state.chart().n;
    let pairs = (0..state.chart().nodes())
        .into_par_iter()
        .map(|node| {
            let geo = state.bg.node(node);
            let vj = node_jet(state, node, closure);
            let g: Vec<f64> = geo.h.iter().zip(&vj.g).map(|(a, b)| a + b).collect();
            let ginv = state.g_inverse(node, &g)?;
            let rhs = node_terms(geo, &vj, &ginv, n, false).rhs;
            Ok((rhs, node_linear(geo, &vj, n)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rhs, lin): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok((project(state, &rhs), project(state, &lin)))
}

/// The conditioned pieces `T1, T2, T3, L v, Q v, E` as ansatz fields.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub rhs: ZeroFrameTensor,
    /// `((h+v)^{ab} - h^{ab}) D_a D_b v`
    pub t1: ZeroFrameTensor,
    /// Full curvature term `g^{ab}(g_ip h^{pq} R_jaqb + g_jp h^{pq} R_iaqb)`.
    pub t2: ZeroFrameTensor,
    pub t3: ZeroFrameTensor,
    pub lv: ZeroFrameTensor,
    pub q1: ZeroFrameTensor,
    pub q2: ZeroFrameTensor,
    pub q3: ZeroFrameTensor,
    pub qv: ZeroFrameTensor,
    pub e: ZeroFrameTensor,
}

impl Decomposition {
    /// `max |rhs - (Lv + Qv + 2E)| / max(|rhs|, |Lv|, |Qv|, |2E|)`
    pub fn identity_residual(&self) -> f64 {
        let mut re = self.lv.add(&self.qv);
        re.axpy(2.0, &self.e);
        let diff = self.rhs.sub(&re).max_abs();
        let scale = self
            .rhs
            .max_abs()
            .max(self.lv.max_abs())
            .max(self.qv.max_abs())
            .max(2.0 * self.e.max_abs());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

pub fn condition_decompose(state: &MetricState, closure: SClosure) -> Result<Decomposition> {
    let n = state.chart().n;
    let terms = (0..state.chart().nodes())
        .into_par_iter()
        .map(|node| {
            let geo = state.bg.node(node);
            let vj = node_jet(state, node, closure);
            let g: Vec<f64> = geo.h.iter().zip(&vj.g).map(|(a, b)| a + b).collect();
            let ginv = state.g_inverse(node, &g)?;
            Ok(node_terms(geo, &vj, &ginv, n, true))
        })
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&NodeTerms) -> &Vec<f64>| {
        let m: Vec<Vec<f64>> = terms.iter().map(|t| f(t).clone()).collect();
        project(state, &m)
    };
    let q1 = pick(|t| &t.q1);
    let q2 = pick(|t| &t.q2);
    let q3 = pick(|t| &t.t3);
    let qv = q1.add(&q2).add(&q3);
    Ok(Decomposition {
        rhs: pick(|t| &t.rhs),
        t1: pick(|t| &t.t1),
        t2: pick(|t| &t.t2),
        t3: q3.clone(),
        lv: pick(|t| &t.lv),
        q1,
        q2,
        q3,
        qv,
        e: pick(|t| &t.e),
    })
}

/// `Q(v) = rhs - L v - 2E`, the quadratic remainder.
pub fn quadratic_part(state: &MetricState, closure: SClosure) -> Result<ZeroFrameTensor> {
    Ok(condition_decompose(state, closure)?.qv)
}

/// Background Lichnerowicz-type operator applied to `v`.
pub fn lichnerowicz_apply(
    v: &ZeroFrameTensor,
    bg: &BackgroundGeometry,
    closure: SClosure,
) -> ZeroFrameTensor {
    let chart = *bg.chart();
    let n = chart.n;
    let mats: Vec<Vec<f64>> = (0..chart.nodes())
        .into_par_iter()
        .map(|node| {
            let (ix, iy) = chart.node_coords(node);
            let vj = Jet::from_frame(&chart, ix, &perturbation_derivs(v, ix, iy, closure));
            node_linear(bg.node(node), &vj, n)
        })
        .collect();
    let mut out = ZeroFrameTensor::zeros(chart);
    for (node, m) in mats.iter().enumerate() {
        project_from(&chart, m, out.comps_mut(node));
    }
    out
}

/// Largest off-ansatz entry produced by the right-hand side (the ansatz is
/// preserved exactly, so this should sit at roundoff).
pub fn ansatz_defect(state: &MetricState, closure: SClosure) -> Result<f64> {
    let chart = *state.chart();
    let n = chart.n;
    let mut worst: f64 = 0.0;
    let mut tmp = vec![0.0; chart.ncomp()];
    for node in 0..chart.nodes() {
        let geo = state.bg.node(node);
        let vj = node_jet(state, node, closure);
        let g: Vec<f64> = geo.h.iter().zip(&vj.g).map(|(a, b)| a + b).collect();
        let ginv = state.g_inverse(node, &g)?;
        let t = node_terms(geo, &vj, &ginv, n, false);
        worst = worst.max(project_from(&chart, &t.rhs, &mut tmp));
    }
    Ok(worst)
}
