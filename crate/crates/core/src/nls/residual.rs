use serde::{Deserialize, Serialize};

use crate::coeff::NlsProblem;
use crate::error::{Error, Result};
use crate::graph::{EndRole, MetricGraph, VertexId};
use crate::grid::GridFunction;
use crate::ode::{integrate, OdeState, Tolerance};

/// Residuals of a candidate, relative to `max(1, |u|_∞)` for values and
/// `max(1, |u'|_∞)` for derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    pub continuity_max: f64,
    pub kirchhoff_max: f64,
    pub ode_defect_max: f64,
    pub tail_mismatch: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.continuity_max
            .max(self.kirchhoff_max)
            .max(self.ode_defect_max)
            .max(self.tail_mismatch)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// `|Σ du_e/dx(v)|` over edge ends at `v`, derivatives pointing away from `v`.
pub fn kirchhoff_residual(g: &MetricGraph, u: &GridFunction, v: VertexId) -> Result<f64> {
    if v.0 >= g.vertex_count() {
        return Err(Error::InvalidArgument(format!("vertex {v} not in graph")));
    }
    Ok(outgoing_sum(g, u, v).abs())
}

fn outgoing_sum(g: &MetricGraph, u: &GridFunction, v: VertexId) -> f64 {
    g.incident(v)
        .iter()
        .map(|&(e, role)| {
            let s = u.edge(e);
            match role {
                EndRole::Tail => s.du[0],
                EndRole::Head => -s.du[s.grid.n - 1],
            }
        })
        .sum()
}

pub fn residual_report(
    g: &MetricGraph,
    u: &GridFunction,
    prob: &NlsProblem,
    continuity: f64,
) -> Result<ResidualReport> {
    let uscale = u.max_abs().max(1.0);
    let dscale = u
        .edge_samples()
        .iter()
        .flat_map(|s| s.du.iter())
        .fold(0.0f64, |m, d| m.max(d.abs()))
        .max(1.0);
    let kirchhoff = g
        .vertices()
        .map(|v| outgoing_sum(g, u, v).abs())
        .fold(0.0, f64::max);

    let tol = Tolerance::new(1e-12, 1e-14 * uscale)?;
    let mut defect: f64 = 0.0;
    for e in g.edges() {
        let s = u.edge(e.id);
        let ep = prob.on_edge(e.id);
        for j in 0..s.grid.n - 1 {
            let (x0, x1) = (s.grid.x(j), s.grid.x(j + 1));
            let traj = integrate(
                |x, v| ep.accel(x, v),
                x0,
                OdeState::new(s.u[j], s.du[j]),
                x1,
                tol,
            )?;
            let end = traj.last();
            defect = defect
                .max((end.u - s.u[j + 1]).abs() / uscale)
                .max((end.du - s.du[j + 1]).abs() / dscale);
        }
    }

    let mut tail: f64 = 0.0;
    for e in g.half_lines() {
        if let Some(t) = u.tail(e.id) {
            let s = u.edge(e.id);
            let (ul, dl) = (s.u[s.grid.n - 1], s.du[s.grid.n - 1]);
            tail = tail
                .max((ul - t.amplitude).abs() / uscale)
                .max((dl + t.rate * ul).abs() / dscale);
        }
    }

    Ok(ResidualReport {
        continuity_max: continuity / uscale,
        kirchhoff_max: kirchhoff / dscale,
        ode_defect_max: defect,
        tail_mismatch: tail,
    })
}
