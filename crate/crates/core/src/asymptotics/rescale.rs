//! Blow-up rescaling `ũ(y) = u(x₀ + ε̃ y) / u(x₀)` with
//! `ε̃ = |u(x₀)|^{-(p-2)/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{interval, EdgeId, EndRole, GraphPoint, MetricGraph, VertexId};
use crate::grid::{EdgeGrid, EdgeSamples, GridFunction};

/// Line chart when `dist(x₀, V) / ε̃` is at least this, star chart otherwise.
pub const STAR_CHART_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Chart {
    /// `y ∈ [-r, r]`, stored on the interval `[0, 2r]` with `y = t - r`.
    Line,
    /// One branch `[0, r]` per direction leaving `vertex`; the maximum sits
    /// at `ŷ` on branch `branch`.
    Star {
        vertex: VertexId,
        branch: usize,
        y_hat: f64,
    },
}

#[derive(Debug, Clone)]
pub struct RescaledProfile {
    pub chart: Chart,
    /// The chart as a metric graph carrying `ũ`.
    pub graph: MetricGraph,
    pub u: GridFunction,
    pub eps: f64,
    /// `u(x₀)`.
    pub amplitude: f64,
    /// For star charts, the original edge and direction behind each branch.
    pub branches: Vec<(EdgeId, EndRole)>,
}

impl RescaledProfile {
    /// `ũ(y)` on a line chart.
    pub fn line_value(&self, y: f64) -> Option<f64> {
        let r = 0.5 * self.graph.edge(EdgeId(0)).length;
        match self.chart {
            Chart::Line if y.abs() <= r => Some(self.u.eval(EdgeId(0), y + r).0),
            _ => None,
        }
    }

    /// `ũ(ŷ)` along star branch `b`.
    pub fn branch_value(&self, b: usize, y: f64) -> Option<f64> {
        match self.chart {
            Chart::Star { .. } if b < self.branches.len() => {
                let len = self.graph.edge(EdgeId(b)).length;
                (0.0..=len).contains(&y).then(|| self.u.eval(EdgeId(b), y).0)
            }
            _ => None,
        }
    }
}

fn nearest_vertex(g: &MetricGraph, x: GraphPoint) -> (VertexId, f64) {
    let e = g.edge(x.edge);
    match e.head {
        Some(h) if e.length - x.s < x.s => (h, e.length - x.s),
        _ => (e.tail, x.s),
    }
}

fn edge_reach(g: &MetricGraph, u: &GridFunction, e: EdgeId) -> f64 {
    let edge = g.edge(e);
    if edge.is_bounded() {
        edge.length
    } else if u.tail(e).is_some() {
        f64::INFINITY
    } else {
        u.edge(e).grid.span
    }
}

/// Rescale `u` around `x0` on a window of radius `r` (in rescaled units),
/// sampled with `points` nodes per branch.
pub fn rescale_profile(
    g: &MetricGraph,
    u: &GridFunction,
    p: f64,
    x0: GraphPoint,
    r: f64,
    points: usize,
) -> Result<RescaledProfile> {
    let amplitude = u.at(x0);
    if amplitude == 0.0 {
        return Err(Error::InvalidArgument("cannot rescale around a zero of u".into()));
    }
    if !(r > 0.0) || points < 2 {
        return Err(Error::InvalidArgument("window radius must be positive".into()));
    }
    let eps = amplitude.abs().powf(-(p - 2.0) / 2.0);
    let scale = |(v, dv): (f64, f64)| (v / amplitude, eps * dv / amplitude);
    let (vertex, dist) = nearest_vertex(g, x0);
    let y_hat = dist / eps;

    if y_hat >= STAR_CHART_THRESHOLD {
        let reach = edge_reach(g, u, x0.edge);
        if x0.s - eps * r < 0.0 || x0.s + eps * r > reach {
            return Err(Error::InvalidArgument(format!(
                "window of radius {r} leaves edge '{}'",
                g.edge(x0.edge).name
            )));
        }
        let chart_graph = interval(2.0 * r)?;
        let grid = EdgeGrid::new(2.0 * r, points)?;
        let samples = EdgeSamples::from_fn(grid, |t| scale(u.eval(x0.edge, x0.s + eps * (t - r))));
        let (gf, _) = GridFunction::assemble(&chart_graph, vec![samples], vec![None])?;
        return Ok(RescaledProfile {
            chart: Chart::Line,
            graph: chart_graph,
            u: gf,
            eps,
            amplitude,
            branches: Vec::new(),
        });
    }

    if y_hat > r {
        return Err(Error::InvalidArgument(format!(
            "maximum at ŷ = {y_hat} lies outside the window of radius {r}"
        )));
    }
    let dirs = g.incident(vertex).to_vec();
    let mut b = MetricGraph::builder().vertex("o");
    for k in 0..dirs.len() {
        b = b.vertex(&format!("y{k}")).edge(&format!("b{k}"), "o", &format!("y{k}"), r);
    }
    let chart_graph = b.build()?;
    let mut samples = Vec::with_capacity(dirs.len());
    let mut branch = None;
    for (k, &(e, role)) in dirs.iter().enumerate() {
        let reach = edge_reach(g, u, e);
        if eps * r > reach {
            return Err(Error::InvalidArgument(format!(
                "window of radius {r} leaves edge '{}'",
                g.edge(e).name
            )));
        }
        let len = g.edge(e).length;
        let grid = EdgeGrid::new(r, points)?;
        samples.push(EdgeSamples::from_fn(grid, |y| match role {
            EndRole::Tail => scale(u.eval(e, eps * y)),
            EndRole::Head => {
                let (v, dv) = scale(u.eval(e, len - eps * y));
                (v, -dv)
            }
        }));
        let along = match role {
            EndRole::Tail => x0.s,
            EndRole::Head => len - x0.s,
        };
        if branch.is_none() && e == x0.edge && (along - dist).abs() <= 1e-12 * (1.0 + dist) {
            branch = Some(k);
        }
    }
    let (gf, _) = GridFunction::assemble(&chart_graph, samples, vec![None; dirs.len()])?;
    Ok(RescaledProfile {
        chart: Chart::Star {
            vertex,
            branch: branch.unwrap_or(0),
            y_hat,
        },
        graph: chart_graph,
        u: gf,
        eps,
        amplitude,
        branches: dirs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::find_local_maxima;
    use crate::nls::{build_four_star_family, build_line_soliton, FourStarVariant};
    use crate::ode::{soliton, soliton_state};

    #[test]
    fn soliton_limit_profile() {
        let p = 4.0;
        let lambda = 100.0;
        let ex = build_line_soliton(p, lambda).unwrap();
        let shift = GraphPoint::new(&ex.graph, EdgeId(0), 0.0).unwrap();
        // the maximum sits at the vertex, so the chart is a two-branch star
        let prof = rescale_profile(&ex.graph, ex.candidate.u(), p, shift, 8.0, 2001).unwrap();
        assert!(matches!(prof.chart, Chart::Star { y_hat, .. } if y_hat == 0.0));
        let lt = 2.0 / p;
        let peak = soliton(p, lt, 0.0).unwrap();
        let mut diff: f64 = 0.0;
        for b in 0..2 {
            for k in 0..=400 {
                let y = 8.0 * k as f64 / 400.0;
                let exact = soliton(p, lt, y).unwrap() / peak;
                diff = diff.max((prof.branch_value(b, y).unwrap() - exact).abs());
            }
        }
        assert!(diff <= 1e-4, "{diff}");
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_chart_on_shifted_soliton_and_idempotence() {
        // a soliton piece centred far from the vertex of a star: the line chart
        let p = 4.0;
        let lambda = 100.0;
        let g = crate::graph::star_graph(1).unwrap();
        let c = 3.0;
        let grid = EdgeGrid::new(8.0, 16001).unwrap();
        let samples = EdgeSamples::from_fn(grid, |x| {
            let s = soliton_state(p, lambda, x - c).unwrap();
            (s.u, s.du)
        });
        let (u, _) = GridFunction::assemble(&g, vec![samples], vec![None]).unwrap();
        let x0 = GraphPoint::new(&g, EdgeId(0), c).unwrap();
        assert!(rescale_profile(&g, &u, p, x0, 100.0, 11).is_err());
        let prof = rescale_profile(&g, &u, p, x0, 12.0, 4001).unwrap();
        assert_eq!(prof.chart, Chart::Line);
        assert_eq!(prof.line_value(0.0), Some(1.0));
        for k in -20..=20 {
            let y = 0.5 * k as f64;
            let exact = soliton(p, 2.0 / p, y).unwrap() / soliton(p, 2.0 / p, 0.0).unwrap();
            assert!((prof.line_value(y).unwrap() - exact).abs() < 1e-6);
        }
        let mid = GraphPoint::new(&prof.graph, EdgeId(0), 12.0).unwrap();
        let again = rescale_profile(&prof.graph, &prof.u, p, mid, 5.0, 1001).unwrap();
        assert_eq!(again.eps, 1.0);
        for k in -10..=10 {
            let y = 0.5 * k as f64;
            assert!((again.line_value(y).unwrap() - prof.line_value(y).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn four_star_near_star_chart() {
        let p = 4.0;
        let ex = build_four_star_family(p, 100.0, FourStarVariant::Near).unwrap();
        let m = find_local_maxima(&ex.graph, ex.candidate.u());
        let prof = rescale_profile(&ex.graph, ex.candidate.u(), p, m[0].point, 6.0, 1201).unwrap();
        match prof.chart {
            Chart::Star { y_hat, branch, .. } => {
                assert!((y_hat - (p / 2.0).sqrt()).abs() < 1e-6, "{y_hat}");
                assert_eq!(branch, 0);
                assert!((prof.branch_value(0, y_hat).unwrap() - 1.0).abs() < 1e-6);
            }
            Chart::Line => panic!("expected a star chart"),
        }
    }
}
