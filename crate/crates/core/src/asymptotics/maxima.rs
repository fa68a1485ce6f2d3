//! Local maxima of `|u|`.

use serde::Serialize;

use crate::coeff::NlsProblem;
use crate::graph::{EndRole, GraphPoint, MetricGraph};
use crate::grid::GridFunction;
use crate::util::illinois;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMax {
    pub point: GraphPoint,
    /// `u` at the maximum (signed).
    pub value: f64,
}

/// Local maxima of `|u|`, ordered by edge and coordinate.
///
/// Inside an edge a maximum is a sign change from `+` to `-` of
/// `sign(u) u'` between grid nodes, refined on the Hermite interpolant. A
/// vertex is a maximum when `sign(u) u'` is nonpositive along every outgoing
/// direction.
pub fn find_local_maxima(g: &MetricGraph, u: &GridFunction) -> Vec<LocalMax> {
    let umax = u.max_abs();
    if umax == 0.0 {
        return Vec::new();
    }
    let zero = 1e-9 * umax;
    let dmax = u
        .edge_samples()
        .iter()
        .flat_map(|s| s.du.iter())
        .fold(0.0f64, |m, d| m.max(d.abs()));
    let dtol = 1e-9 * dmax.max(umax);
    let mut out = Vec::new();

    for v in g.vertices() {
        let val = u.vertex_value(v);
        if val.abs() <= zero || g.incident(v).is_empty() {
            continue;
        }
        let peak = g.incident(v).iter().all(|&(e, role)| {
            let s = u.edge(e);
            let d = match role {
                EndRole::Tail => s.du[0],
                EndRole::Head => -s.du[s.grid.n - 1],
            };
            val.signum() * d <= dtol
        });
        if peak {
            if let Ok(point) = GraphPoint::at_vertex(g, v) {
                out.push(LocalMax { point, value: val });
            }
        }
    }

    for e in g.edges() {
        let s = u.edge(e.id);
        let slope = |j: usize| {
            let v = s.u[j];
            if v.abs() <= zero {
                0.0
            } else {
                v.signum() * s.du[j]
            }
        };
        let mut last_pos: Option<usize> = None;
        for j in 0..s.grid.n {
            let f = slope(j);
            if f > dtol {
                last_pos = Some(j);
            } else if f < -dtol {
                if let Some(i) = last_pos.take() {
                    let sign = s.u[i].signum();
                    let (a, b) = (s.grid.x(i), s.grid.x(j));
                    let x = illinois(|x| sign * s.eval(x).1, a, b, 1e-14 * s.grid.span, 200)
                        .unwrap_or(0.5 * (a + b));
                    let value = s.eval(x).0;
                    if value.abs() > zero && x > 0.0 && x < e.length {
                        out.push(LocalMax {
                            point: GraphPoint { edge: e.id, s: x },
                            value,
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.point
            .edge
            .0
            .cmp(&b.point.edge.0)
            .then(a.point.s.total_cmp(&b.point.s))
    });
    out
}

/// `((λ - W̄) / b)^{1/(p-2)}`, the smallest possible nonzero local maximum of
/// `|u|` for a solution, when `λ > W̄`.
pub fn lower_bound_max(prob: &NlsProblem) -> Option<f64> {
    let alpha = prob.lambda - prob.bounds.w_bar;
    (alpha > 0.0).then(|| (alpha / prob.bounds.b).powf(1.0 / (prob.p - 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{star_graph, EdgeId};
    use crate::grid::EdgeGrid;
    use crate::nls::{build_four_star_family, build_line_soliton, FourStarVariant};
    use crate::ode::soliton_peak;

    #[test]
    fn soliton_single_vertex_max() {
        for p in [3.0, 4.0, 8.0] {
            let ex = build_line_soliton(p, 9.0).unwrap();
            let m = find_local_maxima(&ex.graph, ex.candidate.u());
            assert_eq!(m.len(), 1, "{m:?}");
            assert_eq!(m[0].point.s, 0.0);
            let peak = (9.0 * p / 2.0).powf(1.0 / (p - 2.0));
            assert!((m[0].value - peak).abs() < 1e-12 * peak);
            assert!((peak - soliton_peak(p, 9.0)).abs() < 1e-12 * peak);
            let lb = lower_bound_max(ex.candidate.prob()).unwrap();
            assert!(m[0].value >= lb * (1.0 - 1e-6));
        }
    }

    #[test]
    fn four_star_near_has_odd_edge_maxima() {
        let lambda = 100.0;
        let ex = build_four_star_family(4.0, lambda, FourStarVariant::Near).unwrap();
        let m = find_local_maxima(&ex.graph, ex.candidate.u());
        assert_eq!(m.len(), 2, "{m:?}");
        assert_eq!(m[0].point.edge, EdgeId(0));
        assert_eq!(m[1].point.edge, EdgeId(2));
        for x in &m {
            assert!((x.point.s - lambda.powf(-0.5)).abs() < 1e-6 * lambda.powf(-0.5), "{x:?}");
            assert!((x.value - soliton_peak(4.0, lambda)).abs() < 1e-6 * x.value);
        }
    }

    #[test]
    fn zero_has_no_maxima() {
        let g = star_graph(3).unwrap();
        let u = GridFunction::zeros(&g, &[EdgeGrid::new(5.0, 11).unwrap(); 3]);
        assert!(find_local_maxima(&g, &u).is_empty());
    }

    #[test]
    fn negative_bump_detected() {
        let ex = build_line_soliton(4.0, 1.0).unwrap();
        let u = ex.candidate.u().scaled(-1.0);
        let m = find_local_maxima(&ex.graph, &u);
        assert_eq!(m.len(), 1);
        assert!(m[0].value < 0.0);
    }
}
