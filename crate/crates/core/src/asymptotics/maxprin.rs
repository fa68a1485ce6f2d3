//! Sampled check of the maximum principle: for `W >= 0`, a continuous `φ`
//! with `-φ'' + Wφ >= 0` on every edge and nonpositive outgoing flux at every
//! vertex where `φ < 0` is nonnegative, or a negative constant with `W ≡ 0`,
//! or unbounded below along a half-line.

use serde::Serialize;

use crate::coeff::Coefficient;
use crate::graph::{EdgeId, EndRole, GraphPoint, MetricGraph};
use crate::grid::GridFunction;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum MaxPrincipleClass {
    Nonneg,
    NegativeConstantWithWZero { value: f64 },
    InfIsMinusInfinity { half_lines: Vec<EdgeId> },
    HypothesisViolated { location: GraphPoint, reason: String },
    /// Hypotheses hold on the samples but no conclusion does.
    Contradiction { location: GraphPoint },
}

fn violated(edge: EdgeId, s: f64, reason: String) -> MaxPrincipleClass {
    MaxPrincipleClass::HypothesisViolated {
        location: GraphPoint { edge, s },
        reason,
    }
}

pub fn maximum_principle_check(g: &MetricGraph, w: &Coefficient, phi: &GridFunction) -> MaxPrincipleClass {
    if let Err(e) = w.validate(g, "W") {
        return violated(EdgeId(0), 0.0, e.to_string());
    }
    let scale = phi.max_abs();
    for e in g.edges() {
        let (lo, _) = w.edge(e.id).range();
        if lo < 0.0 {
            return violated(e.id, 0.0, format!("W < 0 on edge '{}'", e.name));
        }
    }

    for e in g.edges() {
        let s = phi.edge(e.id);
        let h = s.grid.h();
        let floor = 1e3 * f64::EPSILON * scale / h;
        for j in 1..s.grid.n - 1 {
            let x = s.grid.x(j);
            let dd = (s.du[j + 1] - s.du[j - 1]) / (2.0 * h);
            let wphi = w.eval(e.id, x) * s.u[j];
            let defect = -dd + wphi;
            if defect < -(1e-6 * (dd.abs() + wphi.abs()) + floor) {
                return violated(e.id, x, format!("-φ'' + Wφ = {defect:e} < 0"));
            }
        }
        if let Some(t) = phi.tail(e.id) {
            let wt = w.eval(e.id, f64::MAX);
            let defect = (wt - t.rate * t.rate) * t.amplitude;
            if defect < -1e-6 * (t.rate * t.rate + wt) * t.amplitude.abs() {
                return violated(e.id, s.grid.span, format!("tail defect {defect:e} < 0"));
            }
        }
    }

    let vtol = 1e-12 * scale;
    for v in g.vertices() {
        let val = phi.vertex_value(v);
        if val >= -vtol {
            continue;
        }
        let mut flux = 0.0;
        let mut dscale: f64 = 0.0;
        for &(e, role) in g.incident(v) {
            let s = phi.edge(e);
            let d = match role {
                EndRole::Tail => s.du[0],
                EndRole::Head => -s.du[s.grid.n - 1],
            };
            flux += d;
            dscale = dscale.max(d.abs());
        }
        if flux > 1e-9 * dscale + vtol {
            let Ok(location) = GraphPoint::at_vertex(g, v) else { continue };
            return MaxPrincipleClass::HypothesisViolated {
                location,
                reason: format!("φ(v) = {val:e} < 0 with outgoing flux {flux:e} > 0"),
            };
        }
    }

    let mut min = (f64::INFINITY, GraphPoint { edge: EdgeId(0), s: 0.0 });
    let mut max = f64::NEG_INFINITY;
    for e in g.edges() {
        let s = phi.edge(e.id);
        for (j, &v) in s.u.iter().enumerate() {
            if v < min.0 {
                min = (v, GraphPoint { edge: e.id, s: s.grid.x(j) });
            }
            max = max.max(v);
        }
    }
    if min.0 >= -vtol {
        return MaxPrincipleClass::Nonneg;
    }
    if max - min.0 <= 1e-9 * min.0.abs() && w.is_identically_zero() {
        return MaxPrincipleClass::NegativeConstantWithWZero { value: min.0 };
    }
    let half_lines: Vec<EdgeId> = g
        .half_lines()
        .filter(|e| {
            let s = phi.edge(e.id);
            let last = s.grid.n - 1;
            let lowest = s.u.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            phi.tail(e.id).is_none() && s.u[last] < 0.0 && s.du[last] < 0.0 && s.u[last] <= lowest
        })
        .map(|e| e.id)
        .collect();
    if !half_lines.is_empty() {
        return MaxPrincipleClass::InfIsMinusInfinity { half_lines };
    }
    MaxPrincipleClass::Contradiction { location: min.1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::build_barrier;
    use crate::graph::{interval, star_graph, three_bridge};
    use crate::grid::EdgeGrid;

    fn sample<F: FnMut(EdgeId, f64) -> (f64, f64)>(g: &MetricGraph, span: f64, f: F) -> GridFunction {
        let grids: Vec<_> = g
            .edges()
            .iter()
            .map(|e| EdgeGrid::new(if e.is_bounded() { e.length } else { span }, 401).unwrap())
            .collect();
        GridFunction::sample(g, &grids, vec![None; g.edge_count()], f).unwrap().0
    }

    #[test]
    fn barrier_is_nonneg() {
        let g = three_bridge();
        let lambda = 1e4;
        let center = GraphPoint::new(&g, EdgeId(0), 0.5).unwrap();
        let b = build_barrier(&g, lambda, &[center], 8.0).unwrap();
        let (sub, phi) = b.to_graph_function(&g, 400).unwrap();
        let w = Coefficient::constant(&sub, lambda / 2.0);
        assert_eq!(maximum_principle_check(&sub, &w, &phi), MaxPrincipleClass::Nonneg);
    }

    #[test]
    fn negative_constant() {
        let g = three_bridge();
        let phi = sample(&g, 1.0, |_, _| (-1.0, 0.0));
        let class = maximum_principle_check(&g, &Coefficient::constant(&g, 0.0), &phi);
        assert_eq!(class, MaxPrincipleClass::NegativeConstantWithWZero { value: -1.0 });
        let class = maximum_principle_check(&g, &Coefficient::constant(&g, 1.0), &phi);
        assert!(matches!(class, MaxPrincipleClass::HypothesisViolated { .. }));
    }

    #[test]
    fn decreasing_half_line() {
        let g = star_graph(2).unwrap();
        let phi = sample(&g, 10.0, |e, x| if e == EdgeId(0) { (-x, -1.0) } else { (0.0, 0.0) });
        let class = maximum_principle_check(&g, &Coefficient::constant(&g, 0.0), &phi);
        assert_eq!(
            class,
            MaxPrincipleClass::InfIsMinusInfinity {
                half_lines: vec![EdgeId(0)]
            }
        );
    }

    #[test]
    fn negative_dip_breaks_a_hypothesis() {
        let g = interval(2.0).unwrap();
        let phi = sample(&g, 0.0, |_, x| ((x - 1.0).powi(2) - 0.5, 2.0 * (x - 1.0)));
        let class = maximum_principle_check(&g, &Coefficient::constant(&g, 0.0), &phi);
        assert!(matches!(class, MaxPrincipleClass::HypothesisViolated { .. }), "{class:?}");
    }
}
