//! Pointwise 2-jets of metrics and the curvature formulas built on them.
//!
//! Everything here works in rescaled local coordinates at a grid node,
//! `X = (x - x_n) / x_n`, `Y^a = y^a / x_n`. In these coordinates the
//! components of a 2-tensor at the node coincide with its 0-frame components
//! and all derivatives are O(1), so no `x^{-2}` factor is ever differenced.
//!
//! Index helpers: matrices are row-major `[i][j]`, 3-index arrays `[m][i][j]`,
//! 4-index arrays `[a][b][i][j]`, all with extent `dim`.

use nalgebra::DMatrix;

use super::chart::{CollarChart, Mode};
use super::stencil::NodeDerivs;
use super::tensor::expand_into;

#[inline]
pub fn i2(d: usize, i: usize, j: usize) -> usize {
    i * d + j
}

#[inline]
pub fn i3(d: usize, a: usize, i: usize, j: usize) -> usize {
    (a * d + i) * d + j
}

#[inline]
pub fn i4(d: usize, a: usize, b: usize, i: usize, j: usize) -> usize {
    ((a * d + b) * d + i) * d + j
}

/// Value, first and second coordinate derivatives of a symmetric 2-tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub dim: usize,
    pub g: Vec<f64>,
    /// `dg[m][i][j] = d_m g_ij`
    pub dg: Vec<f64>,
    /// `ddg[m][l][i][j] = d_m d_l g_ij`
    pub ddg: Vec<f64>,
}

impl Jet {
    pub fn zeros(dim: usize) -> Self {
        Jet {
            dim,
            g: vec![0.0; dim * dim],
            dg: vec![0.0; dim * dim * dim],
            ddg: vec![0.0; dim * dim * dim * dim],
        }
    }

    /// Builds the local-coordinate jet of `F x^{-2}` (times the round-sphere
    /// conformal factor in ball mode) from the `(s, y)` derivatives of the
    /// ansatz components `F` at a node.
    pub fn from_frame(chart: &CollarChart, ix: usize, comps: &[NodeDerivs]) -> Self {
        let d = chart.dim();
        let xn = chart.x(ix);
        let mut jet = Jet::zeros(d);
        let dd = d * d;
        let mat = |sel: fn(&NodeDerivs) -> f64| {
            let c: Vec<f64> = comps.iter().map(sel).collect();
            let mut m = vec![0.0; dd];
            expand_into(chart, &c, &mut m);
            m
        };
        let fv = mat(|n| n.v);
        let fs = mat(|n| n.s);
        let fss = mat(|n| n.ss);
        let (fy, fsy, fyy) = if chart.ny > 1 {
            (mat(|n| n.y), mat(|n| n.sy), mat(|n| n.yy))
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };

        for k in 0..dd {
            jet.g[k] = fv[k];
            jet.dg[k] = -fs[k] - 2.0 * fv[k];
            jet.ddg[k] = fss[k] + 5.0 * fs[k] + 6.0 * fv[k];
        }
        if chart.ny > 1 {
            // Y^1 is frame direction 1; the suppressed directions carry no y-dependence.
            for k in 0..dd {
                jet.dg[dd + k] = xn * fy[k];
                let mixed = -xn * (fsy[k] + 2.0 * fy[k]);
                jet.ddg[i4(d, 0, 1, 0, 0) + k] = mixed;
                jet.ddg[i4(d, 1, 0, 0, 0) + k] = mixed;
                jet.ddg[i4(d, 1, 1, 0, 0) + k] = xn * xn * fyy[k];
            }
        }
        if chart.mode == Mode::Ball {
            // Stereographic factor (1 + |y|^2/4)^{-2} has Hessian -delta at y = 0.
            for a in 1..d {
                for i in 1..d {
                    for j in 1..d {
                        jet.ddg[i4(d, a, a, i, j)] -= xn * xn * fv[i2(d, i, j)];
                    }
                }
            }
        }
        jet
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let z = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Jet {
            dim: self.dim,
            g: z(&self.g, &o.g),
            dg: z(&self.dg, &o.dg),
            ddg: z(&self.ddg, &o.ddg),
        }
    }

    pub fn scaled(&self, c: f64) -> Jet {
        let z = |a: &[f64]| a.iter().map(|x| c * x).collect();
        Jet {
            dim: self.dim,
            g: z(&self.g),
            dg: z(&self.dg),
            ddg: z(&self.ddg),
        }
    }
}

/// Dense inverse of a small row-major matrix; `None` when singular.
pub fn invert(d: usize, m: &[f64]) -> Option<Vec<f64>> {
    let mat = DMatrix::from_row_slice(d, d, m);
    let inv = mat.try_inverse()?;
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i2(d, i, j)] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    if out.iter().all(|v| v.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Levi-Civita connection data of a jet.
#[derive(Debug, Clone)]
pub struct Connection {
    pub ginv: Vec<f64>,
    /// `gamma[k][i][j] = Gamma^k_ij`
    pub gamma: Vec<f64>,
    /// `dgamma[m][k][i][j] = d_m Gamma^k_ij`
    pub dgamma: Vec<f64>,
}

pub fn connection(jet: &Jet, ginv: Vec<f64>) -> Connection {
    let d = jet.dim;
    let (dg, ddg) = (&jet.dg, &jet.ddg);
    // Gamma_{l,ij}
    let mut gl = vec![0.0; d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                gl[i3(d, l, i, j)] = 0.5
                    * (dg[i3(d, i, l, j)] + dg[i3(d, j, l, i)] - dg[i3(d, l, i, j)]);
            }
        }
    }
    let mut gamma = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += ginv[i2(d, k, l)] * gl[i3(d, l, i, j)];
                }
                gamma[i3(d, k, i, j)] = s;
                gamma[i3(d, k, j, i)] = s;
            }
        }
    }
    let mut dgamma = vec![0.0; d * d * d * d];
    let mut dgl = vec![0.0; d];
    let mut dgg = vec![0.0; d];
    for m in 0..d {
        for i in 0..d {
            for j in i..d {
                for l in 0..d {
                    dgl[l] = 0.5
                        * (ddg[i4(d, m, i, l, j)] + ddg[i4(d, m, j, l, i)]
                            - ddg[i4(d, m, l, i, j)]);
                    // d_m g_lb Gamma^b_ij
                    let mut s = 0.0;
                    for b in 0..d {
                        s += dg[i3(d, m, l, b)] * gamma[i3(d, b, i, j)];
                    }
                    dgg[l] = s;
                }
                for k in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += ginv[i2(d, k, l)] * (dgl[l] - dgg[l]);
                    }
                    dgamma[i4(d, m, k, i, j)] = s;
                    dgamma[i4(d, m, k, j, i)] = s;
                }
            }
        }
    }
    Connection {
        ginv,
        gamma,
        dgamma,
    }
}

/// Riemann tensor `R_ijkl = g_lm R^m_ijk` with
/// `R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_ip Gamma^p_jk - Gamma^l_jp Gamma^p_ik`.
/// Under this convention the hyperbolic metric has `R = -R^cc`.
pub fn riemann(g: &[f64], conn: &Connection, d: usize) -> Vec<f64> {
    let (gam, dgam) = (&conn.gamma, &conn.dgamma);
    let mut rup = vec![0.0; d];
    let mut r = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in (i + 1)..d {
            for k in 0..d {
                for (l, ru) in rup.iter_mut().enumerate() {
                    let mut s = dgam[i4(d, i, l, j, k)] - dgam[i4(d, j, l, i, k)];
                    for p in 0..d {
                        s += gam[i3(d, l, i, p)] * gam[i3(d, p, j, k)]
                            - gam[i3(d, l, j, p)] * gam[i3(d, p, i, k)];
                    }
                    *ru = s;
                }
                for l in 0..d {
                    let mut s = 0.0;
                    for (m, ru) in rup.iter().enumerate() {
                        s += g[i2(d, l, m)] * ru;
                    }
                    r[i4(d, i, j, k, l)] = s;
                    r[i4(d, j, i, k, l)] = -s;
                }
            }
        }
    }
    r
}

/// `Rc_jk = g^{il} R_ijkl`
pub fn ricci(ginv: &[f64], r: &[f64], d: usize) -> Vec<f64> {
    let mut rc = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..d {
            let mut s = 0.0;
            for i in 0..d {
                for l in 0..d {
                    s += ginv[i2(d, i, l)] * r[i4(d, i, j, k, l)];
                }
            }
            rc[i2(d, j, k)] = s;
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let a = 0.5 * (rc[i2(d, j, k)] + rc[i2(d, k, j)]);
            rc[i2(d, j, k)] = a;
            rc[i2(d, k, j)] = a;
        }
    }
    rc
}

/// `(R^cc)_ijkl = g_il g_jk - g_ik g_jl`
pub fn rcc(g: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    out[i4(d, i, j, k, l)] =
                        g[i2(d, i, l)] * g[i2(d, j, k)] - g[i2(d, i, k)] * g[i2(d, j, l)];
                }
            }
        }
    }
    out
}

/// Squared norm of a 4-tensor with respect to the inverse metric `ginv`.
pub fn norm4_sq(t: &[f64], ginv: &[f64], d: usize) -> f64 {
    // raise one slot at a time
    let mut cur = t.to_vec();
    let mut next = vec![0.0; cur.len()];
    for slot in 0..4 {
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let idx = [a, b, c, e];
                        let mut s = 0.0;
                        for p in 0..d {
                            let mut src = idx;
                            src[slot] = p;
                            s += ginv[i2(d, idx[slot], p)]
                                * cur[i4(d, src[0], src[1], src[2], src[3])];
                        }
                        next[i4(d, a, b, c, e)] = s;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    t.iter().zip(&cur).map(|(a, b)| a * b).sum()
}

/// Squared norm of a symmetric 2-tensor: `tr((ginv A)^2)`.
pub fn norm2_sq(a: &[f64], ginv: &[f64], d: usize) -> f64 {
    let b = mat_mul(d, ginv, a);
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += b[i2(d, i, j)] * b[i2(d, j, i)];
        }
    }
    s
}

pub fn mat_mul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i2(d, i, k)];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                c[i2(d, i, j)] += aik * b[i2(d, k, j)];
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::Anisotropy;
    use crate::geometry::stencil::{node_derivs, SClosure};

    fn hyperbolic_jet(chart: &CollarChart, ix: usize) -> Jet {
        let comps: Vec<NodeDerivs> = (0..chart.ncomp())
            .map(|c| {
                node_derivs(chart, ix, 0, SClosure::OneSided, |_, _| {
                    if c == 0 || chart.ncomp() == 2 || c >= 2 {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        Jet::from_frame(chart, ix, &comps)
    }

    #[test]
    fn hyperbolic_normal_christoffel_is_minus_one() {
        let c = CollarChart::torus(3, 0.01, 0.9, 32).unwrap();
        let jet = hyperbolic_jet(&c, 5);
        let conn = connection(&jet, invert(4, &jet.g).unwrap());
        // local coordinates: Gamma^X_XX = x_n * (-1/x_n)
        assert!((conn.gamma[i3(4, 0, 0, 0)] + 1.0).abs() < 1e-14);
        assert!((conn.gamma[i3(4, 0, 1, 1)] - 1.0).abs() < 1e-14);
        assert!((conn.gamma[i3(4, 1, 0, 1)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_curvature_is_minus_rcc() {
        for n in 2..=5 {
            let c = CollarChart::torus(n, 0.01, 0.9, 32).unwrap();
            let d = c.dim();
            let jet = hyperbolic_jet(&c, 7);
            let conn = connection(&jet, invert(d, &jet.g).unwrap());
            let r = riemann(&jet.g, &conn, d);
            let cc = rcc(&jet.g, d);
            for (a, b) in r.iter().zip(&cc) {
                assert!((a + b).abs() < 1e-13);
            }
            let rc = ricci(&conn.ginv, &r, d);
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { -(n as f64) } else { 0.0 };
                    assert!((rc[i2(d, i, j)] - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn two_tensor_norm_of_identity() {
        let c = CollarChart::new(Mode::Torus, 3, 0.01, 0.5, 16, 8, Anisotropy::OneTangential).unwrap();
        let d = c.dim();
        let mut id = vec![0.0; d * d];
        for i in 0..d {
            id[i2(d, i, i)] = 1.0;
        }
        assert!((norm2_sq(&id, &id, d) - 4.0).abs() < 1e-15);
        let cc = rcc(&id, d);
        // |R^cc|^2 = 2 * dim * (dim - 1)
        assert!((norm4_sq(&cc, &id, d) - 24.0).abs() < 1e-12);
    }
}
