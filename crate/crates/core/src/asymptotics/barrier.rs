//! Exponential barriers: the edge profile `φ₁ cosh(α(ℓ - x))` and the
//! comparison function on the far region `A_R = {d >= R λ^{-1/2}}`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DistanceField, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::grid::{EdgeGrid, EdgeSamples, GridFunction, Tail};
use crate::nls::SolutionCandidate;

/// `cosh⁻¹(e^ξ)` for `ξ >= 0`, without forming `e^ξ`.
pub fn acosh_exp(xi: f64) -> f64 {
    xi + (1.0 + (1.0 - (-2.0 * xi).exp()).sqrt()).ln()
}

/// `φ(x) = φ₁ cosh(α(ℓ - x))` on `[0, ℓ]`, with `α = cosh⁻¹(φ₀/φ₁) / ℓ` and
/// `β = ln(φ₀/φ₁) / ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeBarrier {
    pub ell: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeBarrierCheck {
    pub monotone: bool,
    pub endpoints: bool,
    pub ode: bool,
    pub bound: bool,
    /// Largest violation of any property, relative to `φ₀`.
    pub worst: f64,
}

impl EdgeBarrierCheck {
    pub fn all(&self) -> bool {
        self.monotone && self.endpoints && self.ode && self.bound
    }
}

pub fn barrier_edge(ell: f64, phi0: f64, phi1: f64) -> Result<EdgeBarrier> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidArgument(format!("edge length must be positive, got {ell}")));
    }
    if !(phi1 > 0.0 && phi0.is_finite()) {
        return Err(Error::InvalidArgument(format!("need phi1 > 0, got {phi1}")));
    }
    if phi0 < phi1 {
        return Err(Error::InvalidArgument(format!("need phi0 >= phi1, got {phi0} < {phi1}")));
    }
    let log_ratio = (phi0 / phi1).ln();
    Ok(EdgeBarrier {
        ell,
        phi0,
        phi1,
        alpha: acosh_exp(log_ratio) / ell,
        beta: log_ratio / ell,
    })
}

impl EdgeBarrier {
    /// `(φ(x), φ'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let z = self.alpha * (self.ell - x);
        let lp = self.phi1.ln();
        let (a, b) = ((lp + z).exp(), (lp - z).exp());
        (0.5 * (a + b), -0.5 * self.alpha * (a - b))
    }

    /// Properties of the profile on `samples` equispaced points, to relative
    /// tolerance `tol`: non-increasing; `φ(0) = φ₀`, `φ(ℓ) = φ₁`, `φ'(ℓ) = 0`;
    /// `φ'' = α²φ` through `φ(x+δ) + φ(x-δ) = 2 cosh(αδ) φ(x)`;
    /// `0 < φ(x) <= φ₀ e^{-βx}`.
    pub fn check(&self, samples: usize, tol: f64) -> EdgeBarrierCheck {
        let n = samples.max(3);
        let scale = self.phi0;
        let xs: Vec<f64> = (0..n).map(|j| self.ell * j as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| self.eval(x).0).collect();
        let mut worst: f64 = 0.0;
        let mut note = |v: f64| {
            worst = worst.max(v);
            v <= tol
        };

        let mut monotone = true;
        for w in vals.windows(2) {
            monotone &= note((w[1] - w[0]) / scale);
        }
        let (v0, _) = self.eval(0.0);
        let (v1, d1) = self.eval(self.ell);
        let endpoints = note((v0 - self.phi0).abs() / scale)
            & note((v1 - self.phi1).abs() / scale)
            & note(d1.abs() * self.ell / scale);

        let delta = self.ell / (n - 1) as f64;
        let c = (self.alpha * delta).cosh();
        let mut ode = true;
        for j in 1..n - 1 {
            let lhs = vals[j + 1] + vals[j - 1];
            let rhs = 2.0 * c * vals[j];
            ode &= note((lhs - rhs).abs() / (scale * c));
        }

        let mut bound = true;
        for (&x, &v) in xs.iter().zip(&vals) {
            bound &= v > 0.0;
            let cap = self.phi0 * (-self.beta * x).exp();
            bound &= note((v - cap) / scale);
        }
        EdgeBarrierCheck {
            monotone,
            endpoints,
            ode,
            bound,
            worst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PieceShape {
    /// [`EdgeBarrier`] in the piece's own coordinate.
    Cosh(EdgeBarrier),
    /// `amplitude · e^{-rate x}` on a half-line piece.
    Exp { amplitude: f64, rate: f64 },
}

/// The barrier on `[start, end]` of edge `edge`. When `reversed`, the piece
/// coordinate runs from `end` down to `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierPiece {
    pub edge: EdgeId,
    pub start: f64,
    pub end: f64,
    pub reversed: bool,
    pub shape: PieceShape,
}

impl BarrierPiece {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn alpha(&self) -> f64 {
        match self.shape {
            PieceShape::Cosh(b) => b.alpha,
            PieceShape::Exp { rate, .. } => rate,
        }
    }

    /// `(φ, dφ/ds)` at edge coordinate `s`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        match self.shape {
            PieceShape::Cosh(b) => {
                if self.reversed {
                    let (v, d) = b.eval(self.end - s);
                    (v, -d)
                } else {
                    b.eval(s - self.start)
                }
            }
            PieceShape::Exp { amplitude, rate } => {
                let v = amplitude * (-rate * (s - self.start)).exp();
                (v, -rate * v)
            }
        }
    }
}

/// A vertex of `A_R`: a vertex of the graph, a point of `∂A_R`, or an added
/// degree-two node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierNode {
    pub point: GraphPoint,
    pub distance: f64,
    pub phi: f64,
    pub boundary: bool,
    /// Sum of the outgoing derivatives of `φ`.
    pub flux: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierReport {
    /// `α_e² <= λ/2` on every piece, so `L φ = (W̃ - α²) φ >= 0` wherever
    /// `W̃ >= λ/2`.
    pub supersolution: bool,
    /// Largest `α_e / √λ`.
    pub max_alpha_ratio: f64,
    pub vertex_flux: bool,
    pub max_flux: f64,
    /// `φ >= e^{-R/2}` on `∂A_R`.
    pub lower_bound: bool,
    /// `φ <= e^{R/2} e^{-√λ d / 2}` on sampled points of `A_R`.
    pub upper_bound: bool,
    pub continuous: bool,
    pub positive: bool,
}

impl BarrierReport {
    pub fn all(&self) -> bool {
        self.supersolution
            && self.vertex_flux
            && self.lower_bound
            && self.upper_bound
            && self.continuous
            && self.positive
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Barrier {
    pub lambda: f64,
    pub r: f64,
    /// `R λ^{-1/2}`.
    pub threshold: f64,
    pub pieces: Vec<BarrierPiece>,
    pub nodes: Vec<BarrierNode>,
    /// Isolated points of `A_R`, which carry no piece.
    pub isolated: Vec<GraphPoint>,
    pub report: BarrierReport,
    #[serde(skip)]
    field: Option<DistanceField>,
}

const SAMPLES: usize = 1000;
const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Vertex(VertexId),
    Point(usize, u64),
}

fn key(g: &MetricGraph, e: EdgeId, s: f64) -> NodeKey {
    let edge = g.edge(e);
    if s == 0.0 {
        NodeKey::Vertex(edge.tail)
    } else if edge.head.is_some() && s == edge.length {
        NodeKey::Vertex(edge.head.unwrap())
    } else {
        NodeKey::Point(e.0, s.to_bits())
    }
}

/// Intervals of `{d >= threshold}` on edge `e` together with the anchors
/// `(a, b)` such that `d(s) = min(s + a, b - s)` on each.
fn far_intervals(
    g: &MetricGraph,
    field: &DistanceField,
    centers: &[GraphPoint],
    e: EdgeId,
    threshold: f64,
) -> Vec<(f64, f64, f64, f64)> {
    let edge = g.edge(e);
    let d0 = field.vertex(edge.tail);
    let d1 = edge.head.map(|h| field.vertex(h));
    let lo = (threshold - d0).max(0.0);
    let hi = match d1 {
        Some(d1) => edge.length.min(edge.length - threshold + d1),
        None => f64::INFINITY,
    };
    let mut on_edge: Vec<f64> = centers.iter().filter(|c| c.edge == e).map(|c| c.s).collect();
    on_edge.sort_by(f64::total_cmp);
    let mut cuts = vec![(lo, hi)];
    for &c in &on_edge {
        let mut next = Vec::new();
        for (a, b) in cuts {
            if c - threshold > a {
                next.push((a, (c - threshold).min(b)));
            }
            if c + threshold < b {
                next.push(((c + threshold).max(a), b));
            }
        }
        cuts = next;
    }
    cuts.into_iter()
        .filter(|(a, b)| a <= b)
        .map(|(a, b)| {
            let left = on_edge
                .iter()
                .filter(|&&c| c <= a)
                .map(|&c| -c)
                .fold(d0, f64::min);
            let right = on_edge
                .iter()
                .filter(|&&c| c >= b)
                .copied()
                .fold(d1.map_or(f64::INFINITY, |d| d + edge.length), f64::min);
            (a, b, left, right)
        })
        .collect()
}

/// The comparison function on `A_R` around `centers`: `φ(v) = e^{-√λ d(v)/2}`
/// at the vertices of `A_R`, [`barrier_edge`] along bounded pieces (larger
/// end first) and `e^{-√λ (d(0) + x)/2}` along half-lines. Pieces on which
/// `d` changes slope are split at the kink when both sides have length at
/// least `4 λ^{-1/2}`.
pub fn build_barrier(g: &MetricGraph, lambda: f64, centers: &[GraphPoint], r: f64) -> Result<Barrier> {
    if centers.is_empty() {
        return Err(Error::Empty("center set"));
    }
    if !(lambda > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidArgument("need lambda > 0 and R > 0".into()));
    }
    let k = lambda.sqrt();
    let threshold = r / k;
    let min_len = 4.0 / k;
    let field = DistanceField::new(g, centers);
    let phi_of = |d: f64| (-0.5 * k * d).exp();

    let mut raw: Vec<(EdgeId, f64, f64)> = Vec::new();
    let mut isolated = Vec::new();
    for e in g.edges() {
        for (a, b, left, right) in far_intervals(g, &field, centers, e.id, threshold) {
            if a == b {
                isolated.push(GraphPoint { edge: e.id, s: a });
                continue;
            }
            let kink = 0.5 * (right - left);
            if kink > a && kink < b && kink - a >= min_len && b - kink >= min_len {
                raw.push((e.id, a, kink));
                raw.push((e.id, kink, b));
            } else {
                raw.push((e.id, a, b));
            }
        }
    }
    if raw.is_empty() && isolated.is_empty() {
        return Err(Error::Barrier(format!("A_R is empty for R = {r}")));
    }

    let mut pieces = Vec::with_capacity(raw.len());
    for &(e, a, b) in &raw {
        let edge = g.edge(e);
        if b.is_infinite() {
            let da = field.on_edge(g, e, a);
            pieces.push(BarrierPiece {
                edge: e,
                start: a,
                end: b,
                reversed: false,
                shape: PieceShape::Exp {
                    amplitude: phi_of(da),
                    rate: 0.5 * k,
                },
            });
            continue;
        }
        if b - a < min_len {
            return Err(Error::Barrier(format!(
                "piece [{a}, {b}] of edge '{}' is shorter than 4 λ^(-1/2)",
                edge.name
            )));
        }
        let (pa, pb) = (phi_of(field.on_edge(g, e, a)), phi_of(field.on_edge(g, e, b)));
        let reversed = pa < pb;
        let (p0, p1) = if reversed { (pb, pa) } else { (pa, pb) };
        pieces.push(BarrierPiece {
            edge: e,
            start: a,
            end: b,
            reversed,
            shape: PieceShape::Cosh(barrier_edge(b - a, p0, p1)?),
        });
    }

    let mut nodes: HashMap<NodeKey, BarrierNode> = HashMap::new();
    let mut order = Vec::new();
    let mut continuous = true;
    for piece in &pieces {
        let ends = [(piece.start, 1.0)]
            .into_iter()
            .chain(piece.end.is_finite().then_some((piece.end, -1.0)));
        for (s, dir) in ends {
            let kk = key(g, piece.edge, s);
            let (v, d) = piece.eval(s);
            let dist = field.on_edge(g, piece.edge, s);
            let entry = nodes.entry(kk).or_insert_with(|| {
                order.push(kk);
                BarrierNode {
                    point: GraphPoint { edge: piece.edge, s },
                    distance: dist,
                    phi: phi_of(dist),
                    boundary: dist <= threshold * (1.0 + 1e-12),
                    flux: 0.0,
                }
            });
            continuous &= (v - entry.phi).abs() <= TOL * entry.phi.max(f64::MIN_POSITIVE);
            entry.flux += dir * d;
        }
    }
    let nodes: Vec<BarrierNode> = order.iter().map(|k| nodes[k]).collect();

    let max_alpha_ratio = pieces.iter().map(|p| p.alpha() / k).fold(0.0, f64::max);
    let max_flux = nodes.iter().map(|n| n.flux / n.phi).fold(f64::NEG_INFINITY, f64::max);
    let lower = (-0.5 * r).exp();
    let lower_bound = nodes
        .iter()
        .filter(|n| n.boundary)
        .all(|n| n.phi >= lower * (1.0 - TOL));
    let mut upper_bound = true;
    let mut positive = true;
    for piece in &pieces {
        let span = if piece.end.is_finite() {
            piece.len()
        } else {
            40.0 / k
        };
        for j in 0..=SAMPLES {
            let s = piece.start + span * j as f64 / SAMPLES as f64;
            let v = piece.eval(s).0;
            positive &= v > 0.0;
            let cap = (0.5 * r - 0.5 * k * field.on_edge(g, piece.edge, s)).exp();
            upper_bound &= v <= cap * (1.0 + TOL);
        }
    }
    let report = BarrierReport {
        supersolution: max_alpha_ratio * max_alpha_ratio <= 0.5,
        max_alpha_ratio,
        vertex_flux: max_flux <= TOL,
        max_flux,
        lower_bound,
        upper_bound,
        continuous,
        positive,
    };
    Ok(Barrier {
        lambda,
        r,
        threshold,
        pieces,
        nodes,
        isolated,
        report,
        field: Some(field),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `ε λ^{1/(p-2)} e^{R/2}`.
    pub factor: f64,
    /// Smallest `(factor · φ - |u|) / (factor · φ)` over the samples.
    pub min_margin: f64,
    /// Smallest `(W̃ - λ/2) / λ` on `A_R`, with `W̃ = W + λ - ρ|u|^{p-2}`.
    pub potential_margin: f64,
    pub holds: bool,
}

impl Barrier {
    /// `φ` at edge coordinate `s`, if the point lies in a piece.
    pub fn eval(&self, e: EdgeId, s: f64) -> Option<f64> {
        self.pieces
            .iter()
            .find(|p| p.edge == e && s >= p.start && s <= p.end)
            .map(|p| p.eval(s).0)
    }

    /// Check `ε λ^{1/(p-2)} e^{R/2} φ ± u >= 0` on `A_R`.
    pub fn comparison(&self, c: &SolutionCandidate, eps: f64) -> ComparisonReport {
        let prob = c.prob();
        let p = prob.p;
        let factor = eps * self.lambda.powf(1.0 / (p - 2.0)) * (0.5 * self.r).exp();
        let mut min_margin = f64::INFINITY;
        let mut potential_margin = f64::INFINITY;
        let k = self.lambda.sqrt();
        for piece in &self.pieces {
            let span = if piece.end.is_finite() {
                piece.len()
            } else {
                40.0 / k
            };
            for j in 0..=SAMPLES {
                let s = piece.start + span * j as f64 / SAMPLES as f64;
                let bound = factor * piece.eval(s).0;
                let u = c.u().eval(piece.edge, s).0;
                min_margin = min_margin.min((bound - u.abs()) / bound);
                let wt = prob.w.eval(piece.edge, s) + prob.lambda
                    - prob.rho.eval(piece.edge, s) * u.abs().powf(p - 2.0);
                potential_margin = potential_margin.min((wt - 0.5 * self.lambda) / self.lambda);
            }
        }
        ComparisonReport {
            factor,
            min_margin,
            potential_margin,
            holds: min_margin >= 0.0 && potential_margin >= 0.0,
        }
    }

    /// `A_R` as a metric graph (one edge per piece) carrying `φ`. Half-line
    /// pieces are sampled over `40 λ^{-1/2}` and continued by their tail.
    pub fn to_graph_function(&self, g: &MetricGraph, cells: usize) -> Result<(MetricGraph, GridFunction)> {
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let mut ends = Vec::with_capacity(self.pieces.len());
        for piece in &self.pieces {
            let mut id = |s: f64| {
                let next = index.len();
                *index.entry(key(g, piece.edge, s)).or_insert(next)
            };
            let a = id(piece.start);
            let b = piece.end.is_finite().then(|| id(piece.end));
            ends.push((a, b));
        }
        let mut builder = MetricGraph::builder();
        for id in 0..index.len() {
            builder = builder.vertex(&format!("n{id}"));
        }
        let k = self.lambda.sqrt();
        let mut samples = Vec::new();
        let mut tails = Vec::new();
        for (i, (piece, (a, b))) in self.pieces.iter().zip(ends).enumerate() {
            let name = format!("p{i}");
            let span = match b {
                Some(b) => {
                    builder = builder.edge(&name, &format!("n{a}"), &format!("n{b}"), piece.len());
                    tails.push(None);
                    piece.len()
                }
                None => {
                    builder = builder.half_line(&name, &format!("n{a}"));
                    let span = 40.0 / k;
                    tails.push(Some(Tail {
                        amplitude: piece.eval(piece.start + span).0,
                        rate: piece.alpha(),
                    }));
                    span
                }
            };
            let grid = EdgeGrid::new(span, cells + 1)?;
            samples.push(EdgeSamples::from_fn(grid, |x| piece.eval(piece.start + x)));
        }
        let sub = builder.build()?;
        let (u, _) = GridFunction::assemble(&sub, samples, tails)?;
        Ok((sub, u))
    }

    /// `d` at edge coordinate `s`.
    pub fn distance(&self, g: &MetricGraph, e: EdgeId, s: f64) -> f64 {
        self.field.as_ref().map_or(f64::NAN, |f| f.on_edge(g, e, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::find_local_maxima;
    use crate::graph::{star_graph, three_bridge};
    use crate::nls::build_line_soliton;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_ends_give_constant() {
        let b = barrier_edge(2.0, 0.3, 0.3).unwrap();
        assert_eq!(b.alpha, 0.0);
        assert_eq!(b.eval(0.7).0, 0.3);
        assert!(b.check(1000, 1e-10).all());
    }

    #[test]
    fn unit_example_touches_bound_at_both_ends() {
        let b = barrier_edge(1.0, std::f64::consts::E, 1.0).unwrap();
        assert!((b.beta - 1.0).abs() < 1e-15);
        let cap = |x: f64| std::f64::consts::E * (-x).exp();
        assert!((b.eval(0.0).0 - cap(0.0)).abs() < 1e-14);
        assert!((b.eval(1.0).0 - cap(1.0)).abs() < 1e-14);
        assert!(b.eval(0.5).0 < cap(0.5));
        assert!(b.check(1000, 1e-10).all());
    }

    #[test]
    fn rejects_increasing_ends() {
        assert!(barrier_edge(1.0, 1.0, 2.0).is_err());
        assert!(barrier_edge(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn random_edges_satisfy_barrier_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let ell = 10f64.powf(rng.random_range(-2.0..2.0));
            let phi1 = 10f64.powf(rng.random_range(-20.0..2.0));
            let phi0 = phi1 * rng.random_range(0.0..30.0f64).exp();
            let c = barrier_edge(ell, phi0, phi1).unwrap().check(1000, 1e-10);
            assert!(c.all(), "{ell} {phi0} {phi1} {c:?}");
        }
    }

    #[test]
    fn acosh_exp_bound() {
        for j in 0..=4800 {
            let xi = 2.0 + 0.01 * j as f64;
            let v = acosh_exp(xi);
            assert!(v <= 1.4 * xi);
            if xi < 20.0 {
                assert!((v - xi.exp().acosh()).abs() < 1e-12 * v);
            }
        }
    }

    #[test]
    fn star_two_half_line_barriers() {
        let g = star_graph(2).unwrap();
        let center = GraphPoint::at_vertex(&g, VertexId(0)).unwrap();
        let b = build_barrier(&g, 100.0, &[center], 8.0).unwrap();
        assert_eq!(b.pieces.len(), 2);
        assert!(b.pieces.iter().all(|p| matches!(p.shape, PieceShape::Exp { .. })));
        assert!(b.report.all(), "{:?}", b.report);
        assert!((b.report.max_alpha_ratio - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_bridge_bounded_pieces() {
        let g = three_bridge();
        let center = GraphPoint::new(&g, EdgeId(0), 0.5).unwrap();
        let b = build_barrier(&g, 1e4, &[center], 8.0).unwrap();
        // two pieces on e1, two halves on each of e2 and e3
        assert_eq!(b.pieces.len(), 6);
        assert!(b.pieces.iter().all(|p| matches!(p.shape, PieceShape::Cosh(_))));
        assert!(b.report.all(), "{:?}", b.report);
        assert!(b.nodes.iter().all(|n| n.flux <= 1e-10 * n.phi));
    }

    #[test]
    fn soliton_comparison_holds() {
        let ex = build_line_soliton(4.0, 1e4).unwrap();
        let centers: Vec<_> = find_local_maxima(&ex.graph, ex.candidate.u())
            .into_iter()
            .map(|m| m.point)
            .collect();
        let b = build_barrier(&ex.graph, 1e4, &centers, 8.0).unwrap();
        let c = b.comparison(&ex.candidate, 1.0);
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn short_pieces_are_rejected() {
        let g = three_bridge();
        let center = GraphPoint::new(&g, EdgeId(0), 0.5).unwrap();
        assert!(matches!(build_barrier(&g, 400.0, &[center], 8.0), Err(Error::Barrier(_))));
    }
}
