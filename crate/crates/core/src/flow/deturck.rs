use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::jet::{self, i2, i3};
use crate::geometry::state::MetricState;
use crate::geometry::stencil::SClosure;
use crate::geometry::CollarChart;

/// DeTurck vector field `W^k = g^{pq} (Gamma^k_pq - Gamma~^k_pq)`, stored as
/// components in the 0-frame `{x d_x, x d_y^a}` (node-major, `dim` per node).
#[derive(Debug, Clone)]
pub struct DeturckField {
    pub chart: CollarChart,
    pub w: Vec<f64>,
}

impl DeturckField {
    pub fn at(&self, node: usize) -> &[f64] {
        let d = self.chart.dim();
        &self.w[node * d..(node + 1) * d]
    }

    pub fn max_abs(&self) -> f64 {
        self.w.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

pub fn deturck_vector_field(g: &MetricState, closure: SClosure) -> Result<DeturckField> {
    let chart = *g.chart();
    let d = chart.dim();
    let per = (0..chart.nodes())
        .into_par_iter()
        .map(|node| {
            let jet = g.g_jet(node, closure);
            let ginv = g.g_inverse(node, &jet.g)?;
            let conn = jet::connection(&jet, ginv);
            let bgam = &g.bg.node(node).conn.gamma;
            let mut w = vec![0.0; d];
            for (k, wk) in w.iter_mut().enumerate() {
                let mut s = 0.0;
                for p in 0..d {
                    for q in 0..d {
                        s += conn.ginv[i2(d, p, q)]
                            * (conn.gamma[i3(d, k, p, q)] - bgam[i3(d, k, p, q)]);
                    }
                }
                *wk = s;
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeturckField {
        chart,
        w: per.into_iter().flatten().collect(),
    })
}
