//! Weak-form residual against piecewise linear hat functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SolutionCandidate;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, EndRole, MetricGraph, VertexId};
use crate::util::GAUSS4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    /// Hat of half-width `width` centred at `center` inside an edge.
    EdgeHat {
        edge: EdgeId,
        center: f64,
        width: f64,
    },
    /// `max(0, 1 - d(x, v)/width)` on every edge end at `v`.
    VertexHat { vertex: VertexId, width: f64 },
}

impl TestFunction {
    /// Pieces `(edge, s0, s1, φ(s0), φ(s1))` on which the function is affine
    /// and nonzero.
    fn pieces(&self, g: &MetricGraph) -> Vec<(EdgeId, f64, f64, f64, f64)> {
        match *self {
            Self::EdgeHat {
                edge,
                center,
                width,
            } => vec![
                (edge, center - width, center, 0.0, 1.0),
                (edge, center, center + width, 1.0, 0.0),
            ],
            Self::VertexHat { vertex, width } => g
                .incident(vertex)
                .iter()
                .map(|&(e, role)| match role {
                    EndRole::Tail => (e, 0.0, width, 1.0, 0.0),
                    EndRole::Head => {
                        let l = g.edge(e).length;
                        (e, l - width, l, 0.0, 1.0)
                    }
                })
                .collect(),
        }
    }

    fn validate(&self, g: &MetricGraph, spans: &[f64]) -> Result<()> {
        let ok = match *self {
            Self::EdgeHat {
                edge,
                center,
                width,
            } => {
                edge.0 < g.edge_count()
                    && width > 0.0
                    && center - width >= 0.0
                    && center + width <= spans[edge.0]
            }
            Self::VertexHat { vertex, width } => {
                vertex.0 < g.vertex_count()
                    && width > 0.0
                    && g.incident(vertex).iter().all(|&(e, _)| {
                        let len = g.edge(e).length;
                        let limit = if g.edge(e).is_loop() { 0.5 * len } else { len };
                        width <= limit.min(spans[e.0])
                    })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("test function {self:?} does not fit the graph")))
        }
    }
}

/// `|∫ u'φ' + (W + λ) u φ - ρ |u|^{p-2} u φ|` divided by the integral of the
/// absolute values of the three terms.
pub fn weak_residual(g: &MetricGraph, c: &SolutionCandidate, phi: &TestFunction) -> Result<f64> {
    let u = c.u();
    let prob = c.prob();
    let spans: Vec<f64> = u.edge_samples().iter().map(|s| s.grid.span).collect();
    phi.validate(g, &spans)?;
    let (mut total, mut scale) = (0.0f64, 0.0f64);
    for (e, a, b, fa, fb) in phi.pieces(g) {
        let samples = u.edge(e);
        let slope = (fb - fa) / (b - a);
        let mut cuts: Vec<f64> = vec![a, b];
        cuts.extend(samples.grid.points().filter(|&x| x > a && x < b));
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let h = x1 - x0;
            for (&t, &wt) in GAUSS4.0.iter().zip(&GAUSS4.1) {
                let x = x0 + t * h;
                let (v, dv) = samples.eval(x);
                let f = fa + slope * (x - a);
                let kin = dv * slope;
                let lin = (prob.w.eval(e, x) + prob.lambda) * v * f;
                let non = prob.rho.eval(e, x) * v.abs().powf(prob.p - 2.0) * v * f;
                total += wt * h * (kin + lin - non);
                scale += wt * h * (kin.abs() + lin.abs() + non.abs());
            }
        }
    }
    Ok(if scale > 0.0 { total.abs() / scale } else { 0.0 })
}

/// Largest weak residual over `count` random hats (vertex hats at every
/// vertex, then edge hats), reproducible from `seed`.
pub fn weak_residual_battery(
    g: &MetricGraph,
    c: &SolutionCandidate,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spans: Vec<f64> = c.u().edge_samples().iter().map(|s| s.grid.span).collect();
    let lmin = g.min_bounded_length().unwrap_or(1.0);
    let local = lmin.min(2.0 / c.lambda().abs().sqrt().max(1e-300));
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let width = local * rng.random_range(0.05..0.45);
        let phi = if k < g.vertex_count() {
            TestFunction::VertexHat {
                vertex: VertexId(k),
                width,
            }
        } else {
            let e = EdgeId(rng.random_range(0..g.edge_count()));
            let span = spans[e.0];
            let width = width.min(0.45 * span);
            TestFunction::EdgeHat {
                edge: e,
                center: rng.random_range(width..span - width),
                width,
            }
        };
        worst = worst.max(weak_residual(g, c, &phi)?);
    }
    Ok(worst)
}
