//! Functions on a metric graph sampled on uniform per-edge grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::util::{hermite3, GAUSS4};

/// Uniform grid of `n` points on `[0, span]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeGrid {
    pub span: f64,
    pub n: usize,
}

impl EdgeGrid {
    pub fn new(span: f64, n: usize) -> Result<Self> {
        if n < 2 || !(span > 0.0 && span.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "edge grid needs n >= 2 and finite positive span, got n = {n}, span = {span}"
            )));
        }
        Ok(Self { span, n })
    }

    /// Grid with at most spacing `h`.
    pub fn with_spacing(span: f64, h: f64) -> Result<Self> {
        let cells = (span / h).ceil().max(1.0) as usize;
        Self::new(span, cells + 1)
    }

    pub fn h(&self) -> f64 {
        self.span / (self.n - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.span
        } else {
            self.span * j as f64 / (self.n - 1) as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.x(j))
    }
}

/// Exponential continuation `u(s) = amplitude * exp(-rate * (s - span))` of a
/// half-line beyond its truncation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub amplitude: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub grid: EdgeGrid,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl EdgeSamples {
    pub fn new(grid: EdgeGrid, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        if u.len() != grid.n || du.len() != grid.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {} values and {} derivatives",
                grid.n,
                u.len(),
                du.len()
            )));
        }
        Ok(Self { grid, u, du })
    }

    pub fn from_fn<F: FnMut(f64) -> (f64, f64)>(grid: EdgeGrid, mut f: F) -> Self {
        let (u, du) = grid.points().map(&mut f).unzip();
        Self { grid, u, du }
    }

    /// Hermite interpolation inside `[0, span]`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let h = self.grid.h();
        let j = ((s / h).floor().max(0.0) as usize).min(self.grid.n - 2);
        let t = ((s - self.grid.x(j)) / h).clamp(0.0, 1.0);
        hermite3(t, h, self.u[j], self.du[j], self.u[j + 1], self.du[j + 1])
    }
}

/// A continuous function on a graph.
///
/// Every edge carries samples of `u` and `u'` on a uniform grid of
/// `[0, min(length, span)]`. Vertex values are stored once and copied into the
/// endpoint samples of every incident edge, so continuity is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    edges: Vec<EdgeSamples>,
    vertex_values: Vec<f64>,
    tails: Vec<Option<Tail>>,
}

impl GridFunction {
    /// Glue per-edge samples into one function. Vertex values are the mean of
    /// the incident endpoint samples; the largest deviation from that mean is
    /// returned alongside.
    pub fn assemble(
        g: &MetricGraph,
        mut edges: Vec<EdgeSamples>,
        tails: Vec<Option<Tail>>,
    ) -> Result<(Self, f64)> {
        if edges.len() != g.edge_count() || tails.len() != g.edge_count() {
            return Err(Error::InvalidArgument(
                "one sample set and one tail slot per edge required".into(),
            ));
        }
        for (e, (samples, tail)) in g.edges().iter().zip(edges.iter().zip(&tails)) {
            if e.is_bounded() && (samples.grid.span - e.length).abs() > 1e-12 * e.length {
                return Err(Error::InvalidArgument(format!(
                    "grid of bounded edge '{}' must span its length {}",
                    e.name, e.length
                )));
            }
            match tail {
                Some(t) if e.is_bounded() => {
                    return Err(Error::InvalidArgument(format!(
                        "bounded edge '{}' cannot carry a tail ({t:?})",
                        e.name
                    )))
                }
                Some(t) if !(t.rate > 0.0) => {
                    return Err(Error::InvalidArgument(format!(
                        "tail rate must be positive, got {}",
                        t.rate
                    )))
                }
                _ => {}
            }
        }
        let mut sum = vec![0.0; g.vertex_count()];
        let mut count = vec![0usize; g.vertex_count()];
        for e in g.edges() {
            let s = &edges[e.id.0];
            sum[e.tail.0] += s.u[0];
            count[e.tail.0] += 1;
            if let Some(h) = e.head {
                sum[h.0] += s.u[s.grid.n - 1];
                count[h.0] += 1;
            }
        }
        let vertex_values: Vec<f64> = sum
            .iter()
            .zip(&count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        let mut gap: f64 = 0.0;
        for e in g.edges() {
            let s = &mut edges[e.id.0];
            let last = s.grid.n - 1;
            gap = gap.max((s.u[0] - vertex_values[e.tail.0]).abs());
            s.u[0] = vertex_values[e.tail.0];
            if let Some(h) = e.head {
                gap = gap.max((s.u[last] - vertex_values[h.0]).abs());
                s.u[last] = vertex_values[h.0];
            }
        }
        Ok((
            Self {
                edges,
                vertex_values,
                tails,
            },
            gap,
        ))
    }

    /// Sample `f(edge, s) -> (u, u')` on the given grids.
    pub fn sample<F: FnMut(EdgeId, f64) -> (f64, f64)>(
        g: &MetricGraph,
        grids: &[EdgeGrid],
        tails: Vec<Option<Tail>>,
        mut f: F,
    ) -> Result<(Self, f64)> {
        let edges = g
            .edges()
            .iter()
            .zip(grids)
            .map(|(e, grid)| EdgeSamples::from_fn(*grid, |s| f(e.id, s)))
            .collect();
        Self::assemble(g, edges, tails)
    }

    /// The zero function on the given grids.
    pub fn zeros(g: &MetricGraph, grids: &[EdgeGrid]) -> Self {
        Self::sample(g, grids, vec![None; g.edge_count()], |_, _| (0.0, 0.0))
            .expect("grids match graph")
            .0
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeSamples {
        &self.edges[e.0]
    }

    pub fn edge_samples(&self) -> &[EdgeSamples] {
        &self.edges
    }

    pub fn grids(&self) -> Vec<EdgeGrid> {
        self.edges.iter().map(|s| s.grid).collect()
    }

    pub fn tail(&self, e: EdgeId) -> Option<Tail> {
        self.tails[e.0]
    }

    pub fn tails(&self) -> &[Option<Tail>] {
        &self.tails
    }

    pub fn vertex_value(&self, v: VertexId) -> f64 {
        self.vertex_values[v.0]
    }

    /// Value and derivative at coordinate `s` of edge `e`. Beyond the sampled
    /// span of a half-line the tail applies, or zero without one.
    pub fn eval(&self, e: EdgeId, s: f64) -> (f64, f64) {
        let samples = &self.edges[e.0];
        if s <= samples.grid.span {
            return samples.eval(s);
        }
        match self.tails[e.0] {
            Some(t) => {
                let v = t.amplitude * (-t.rate * (s - samples.grid.span)).exp();
                (v, -t.rate * v)
            }
            None => (0.0, 0.0),
        }
    }

    pub fn at(&self, p: GraphPoint) -> f64 {
        self.eval(p.edge, p.s).0
    }

    /// Largest sampled `|u|` (tails are monotone, so samples suffice).
    pub fn max_abs(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|s| s.u.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `∫ |u|^q` over edge `e`, four-point Gauss on the Hermite interpolant per
    /// cell plus the exact tail integral.
    pub fn edge_integral_pow(&self, e: EdgeId, q: f64) -> f64 {
        let s = &self.edges[e.0];
        let h = s.grid.h();
        let (nodes, weights) = GAUSS4;
        let mut total = 0.0;
        for j in 0..s.grid.n - 1 {
            let mut cell = 0.0;
            for (t, w) in nodes.iter().zip(weights) {
                let (v, _) = hermite3(*t, h, s.u[j], s.du[j], s.u[j + 1], s.du[j + 1]);
                cell += w * v.abs().powf(q);
            }
            total += cell * h;
        }
        if let Some(t) = self.tails[e.0] {
            total += t.amplitude.abs().powf(q) / (q * t.rate);
        }
        total
    }

    /// `∫_G |u|^q`.
    pub fn integral_pow(&self, q: f64) -> f64 {
        (0..self.edges.len())
            .map(|k| self.edge_integral_pow(EdgeId(k), q))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.integral_pow(2.0).sqrt()
    }

    /// Multiply values and derivatives by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.edges {
            s.u.iter_mut().for_each(|v| *v *= c);
            s.du.iter_mut().for_each(|v| *v *= c);
        }
        out.vertex_values.iter_mut().for_each(|v| *v *= c);
        for t in out.tails.iter_mut().flatten() {
            t.amplitude *= c;
        }
        out
    }
}
