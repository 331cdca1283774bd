//! Independent oracles for the flow right-hand side and the DeTurck field.

use std::sync::Arc;

use collarflow::flow::{
    condition_decompose, deturck_vector_field, lichnerowicz_apply, rdtf_rhs, quadratic_part,
};
use collarflow::geometry::jet::{connection, i2, i3, i4, invert, ricci, riemann};
use collarflow::geometry::perturb;
use collarflow::geometry::stencil::node_derivs;
use collarflow::geometry::tensor::{expand_into, project_from};
use collarflow::geometry::{
    Anisotropy, Background, BackgroundGeometry, CollarChart, MetricState, Mode, SClosure,
    ZeroFrameTensor,
};
use proptest::prelude::*;

fn tangential_state(kind: Background, amp: f64, seed: u64) -> MetricState {
    let c = CollarChart::new(Mode::Torus, 3, 1e-2, 0.5, 20, 8, Anisotropy::OneTangential).unwrap();
    let bg = Arc::new(BackgroundGeometry::new(c, kind).unwrap());
    let v = perturb::random_smooth(&bg, amp, seed);
    MetricState::unperturbed(bg).with_perturbation(v)
}

fn ball_state(amp: f64, seed: u64) -> MetricState {
    let c = CollarChart::new(Mode::Ball, 4, 1e-2, 0.8, 40, 1, Anisotropy::Isotropic).unwrap();
    let bg = Arc::new(BackgroundGeometry::hyperbolic(c).unwrap());
    let v = perturb::random_smooth(&bg, amp, seed);
    MetricState::unperturbed(bg).with_perturbation(v)
}

/// `-2n g - 2 Rc(g) + D_i W_j + D_j W_i` with `D` the connection of `g`,
/// evaluated from the local jet of `g` alone.
fn definition_rhs(g: &MetricState, node: usize, closure: SClosure) -> Vec<f64> {
    let c = g.chart();
    let d = c.dim();
    let n = c.n as f64;
    let jet = g.g_jet(node, closure);
    let ginv = invert(d, &jet.g).unwrap();
    let conn = connection(&jet, ginv.clone());
    let rc = ricci(&ginv, &riemann(&jet.g, &conn, d), d);
    let bconn = &g.bg.node(node).conn;

    let diff = |k: usize, p: usize, q: usize| conn.gamma[i3(d, k, p, q)] - bconn.gamma[i3(d, k, p, q)];
    let ddiff = |a: usize, k: usize, p: usize, q: usize| {
        conn.dgamma[i4(d, a, k, p, q)] - bconn.dgamma[i4(d, a, k, p, q)]
    };
    // d_a g^{pq} = -g^{pm} d_a g_mn g^{nq}
    let dginv = |a: usize, p: usize, q: usize| {
        let mut s = 0.0;
        for m in 0..d {
            for nn in 0..d {
                s -= ginv[i2(d, p, m)] * jet.dg[i3(d, a, m, nn)] * ginv[i2(d, nn, q)];
            }
        }
        s
    };

    let mut w = vec![0.0; d];
    let mut dw = vec![0.0; d * d]; // dw[a][k] = d_a W^k
    for k in 0..d {
        for p in 0..d {
            for q in 0..d {
                w[k] += ginv[i2(d, p, q)] * diff(k, p, q);
                for a in 0..d {
                    dw[i2(d, a, k)] += dginv(a, p, q) * diff(k, p, q) + ginv[i2(d, p, q)] * ddiff(a, k, p, q);
                }
            }
        }
    }
    let wl: Vec<f64> = (0..d).map(|j| (0..d).map(|k| jet.g[i2(d, j, k)] * w[k]).sum()).collect();
    // nabla_i W_j
    let mut nw = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += jet.dg[i3(d, i, j, k)] * w[k] + jet.g[i2(d, j, k)] * dw[i2(d, i, k)];
            }
            for l in 0..d {
                s -= conn.gamma[i3(d, l, i, j)] * wl[l];
            }
            nw[i2(d, i, j)] = s;
        }
    }
    (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            -2.0 * n * jet.g[k] - 2.0 * rc[k] + nw[i2(d, i, j)] + nw[i2(d, j, i)]
        })
        .collect()
}

fn check_definition_form(g: &MetricState, closure: SClosure) {
    let c = *g.chart();
    let rhs = rdtf_rhs(g, closure).unwrap();
    let scale = rhs.max_abs().max(1.0);
    let mut comps = vec![0.0; c.ncomp()];
    for node in 0..c.nodes() {
        let m = definition_rhs(g, node, closure);
        let off = project_from(&c, &m, &mut comps);
        assert!(off <= 1e-10 * scale, "off-ansatz entry {off}");
        for (a, b) in comps.iter().zip(rhs.comps(node)) {
            assert!((a - b).abs() <= 1e-10 * scale, "node {node}: {a} vs {b}");
        }
    }
}

/// DeTurck field in the global coordinates `(x, y)` of the torus chart, from
/// the grid derivatives of the ansatz components, returned in 0-frame form.
fn deturck_in_xy(g: &MetricState, node: usize, closure: SClosure) -> Vec<f64> {
    let c = *g.chart();
    let d = c.dim();
    let (ix, iy) = c.node_coords(node);
    let x = c.x(ix);
    let first = |field: &ZeroFrameTensor, cl: SClosure| {
        let nd: Vec<_> = (0..c.ncomp())
            .map(|k| node_derivs(&c, ix, iy, cl, |i, j| field.get(i, j, k)))
            .collect();
        let mut m0 = vec![0.0; d * d];
        let mut ms = vec![0.0; d * d];
        let mut my = vec![0.0; d * d];
        expand_into(&c, &nd.iter().map(|q| q.v).collect::<Vec<_>>(), &mut m0);
        expand_into(&c, &nd.iter().map(|q| q.s).collect::<Vec<_>>(), &mut ms);
        expand_into(&c, &nd.iter().map(|q| q.y).collect::<Vec<_>>(), &mut my);
        (m0, ms, my)
    };
    // coordinate metric G / x^2 and its first derivatives
    let christoffel = |parts: &[(Vec<f64>, Vec<f64>, Vec<f64>)]| {
        let mut gm = vec![0.0; d * d];
        let mut dg = vec![0.0; d * d * d];
        for (m0, ms, my) in parts {
            for k in 0..d * d {
                let gx = -ms[k] / x;
                gm[k] += m0[k] / (x * x);
                dg[k] += (gx - 2.0 * m0[k] / x) / (x * x);
                if c.ny > 1 {
                    dg[d * d + k] += my[k] / (x * x);
                }
            }
        }
        let ginv = invert(d, &gm).unwrap();
        let mut gam = vec![0.0; d * d * d];
        for k in 0..d {
            for p in 0..d {
                for q in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += ginv[i2(d, k, l)]
                            * (dg[i3(d, p, l, q)] + dg[i3(d, q, l, p)] - dg[i3(d, l, p, q)]);
                    }
                    gam[i3(d, k, p, q)] = 0.5 * s;
                }
            }
        }
        (ginv, gam)
    };
    let hpart = first(g.bg.frame(), SClosure::OneSided);
    let vpart = first(&g.v, closure);
    let (ginv, gam) = christoffel(&[hpart.clone(), vpart]);
    let (_, bgam) = christoffel(&[hpart]);
    (0..d)
        .map(|k| {
            let mut s = 0.0;
            for p in 0..d {
                for q in 0..d {
                    s += ginv[i2(d, p, q)] * (gam[i3(d, k, p, q)] - bgam[i3(d, k, p, q)]);
                }
            }
            s / x
        })
        .collect()
}

#[test]
fn definition_form_agrees_on_hyperbolic_torus() {
    for seed in 0..3 {
        check_definition_form(&tangential_state(Background::Hyperbolic, 0.05, seed), SClosure::OneSided);
    }
}

#[test]
fn definition_form_agrees_on_curved_backgrounds() {
    check_definition_form(
        &tangential_state(Background::TangentialWave { beta: 0.3 }, 0.05, 7),
        SClosure::OneSided,
    );
    check_definition_form(
        &tangential_state(Background::TangentialRamp { beta: 0.4 }, 0.05, 8),
        SClosure::Mirror,
    );
}

#[test]
fn definition_form_agrees_in_ball_mode() {
    check_definition_form(&ball_state(0.05, 3), SClosure::OneSided);
}

#[test]
fn deturck_field_matches_coordinate_oracle() {
    for kind in [Background::Hyperbolic, Background::TangentialWave { beta: 0.3 }] {
        let g = tangential_state(kind, 0.05, 11);
        let w = deturck_vector_field(&g, SClosure::OneSided).unwrap();
        let scale = w.max_abs().max(1e-3);
        for node in 0..g.chart().nodes() {
            let o = deturck_in_xy(&g, node, SClosure::OneSided);
            for (a, b) in o.iter().zip(w.at(node)) {
                assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn deturck_field_vanishes_for_constant_multiples() {
    let g = tangential_state(Background::Hyperbolic, 0.0, 0);
    assert_eq!(deturck_vector_field(&g, SClosure::OneSided).unwrap().max_abs(), 0.0);
    let scaled = g.with_perturbation(perturb::conformal(&g.bg, 0.3));
    assert!(deturck_vector_field(&scaled, SClosure::OneSided).unwrap().max_abs() < 1e-12);
}

#[test]
fn conformal_family_is_linear() {
    let c = CollarChart::torus(3, 1e-3, 0.5, 64).unwrap();
    let bg = Arc::new(BackgroundGeometry::hyperbolic(c).unwrap());
    let g = MetricState::unperturbed(bg.clone()).with_perturbation(perturb::conformal(&bg, 0.1));
    let rhs = rdtf_rhs(&g, SClosure::Mirror).unwrap();
    let lv = lichnerowicz_apply(&g.v, &bg, SClosure::Mirror);
    let q = quadratic_part(&g, SClosure::Mirror).unwrap();
    for node in 0..c.nodes() {
        for k in 0..c.ncomp() {
            assert!((rhs.comps(node)[k] + 0.6).abs() < 1e-12);
            assert!((lv.comps(node)[k] + 0.6).abs() < 1e-12);
            assert!(q.comps(node)[k].abs() < 1e-12);
        }
    }
}

#[test]
fn origin_of_the_conditioned_equation() {
    let g = tangential_state(Background::TangentialWave { beta: 0.2 }, 0.0, 0);
    let dec = condition_decompose(&g, SClosure::OneSided).unwrap();
    assert_eq!(dec.qv.max_abs(), 0.0);
    assert_eq!(dec.lv.max_abs(), 0.0);
    assert!(dec.e.max_abs() > 0.0);
    assert!(dec.rhs.sub(&dec.e.scaled(2.0)).max_abs() < 1e-12 * dec.rhs.max_abs());
}

#[test]
fn gateaux_quotient_converges_to_the_linearization() {
    let g = tangential_state(Background::TangentialWave { beta: 0.2 }, 0.0, 0);
    let v = perturb::random_smooth(&g.bg, 1.0, 5);
    let base = rdtf_rhs(&g, SClosure::OneSided).unwrap();
    let lv = lichnerowicz_apply(&v, &g.bg, SClosure::OneSided);
    let err = |s: f64| {
        let r = rdtf_rhs(&g.with_perturbation(v.scaled(s)), SClosure::OneSided).unwrap();
        r.sub(&base).scaled(1.0 / s).sub(&lv).max_abs()
    };
    let (e1, e2) = (err(1e-2), err(1e-3));
    let slope = (e1 / e2).log10();
    assert!((slope - 1.0).abs() < 0.15, "slope {slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_reassembles(seed in 0u64..1000, amp in 0.001f64..0.2) {
        let g = tangential_state(Background::TangentialWave { beta: 0.2 }, amp, seed);
        let dec = condition_decompose(&g, SClosure::OneSided).unwrap();
        prop_assert!(dec.identity_residual() < 1e-10);
    }

    #[test]
    fn quadratic_part_is_even_to_leading_order(seed in 0u64..1000) {
        let g = tangential_state(Background::Hyperbolic, 0.0, 0);
        let v = perturb::random_smooth(&g.bg, 1e-3, seed);
        let qp = quadratic_part(&g.with_perturbation(v.clone()), SClosure::OneSided).unwrap();
        let qm = quadratic_part(&g.with_perturbation(v.scaled(-1.0)), SClosure::OneSided).unwrap();
        // Q(v) - Q(-v) is cubic
        prop_assert!(qp.sub(&qm).max_abs() <= 1e-2 * qp.max_abs() + 1e-15);
    }
}
