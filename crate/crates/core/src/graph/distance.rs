use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance to a finite set of source points, evaluated anywhere on the graph.
///
/// Vertex distances come from Dijkstra seeded by the sources; a point inside an
/// edge takes the best of the two endpoints and any source on the same edge.
#[derive(Debug, Clone)]
pub struct DistanceField {
    vertex_dist: Vec<f64>,
    sources: Vec<GraphPoint>,
}

impl DistanceField {
    pub fn new(g: &MetricGraph, sources: &[GraphPoint]) -> Self {
        let mut dist = vec![f64::INFINITY; g.vertex_count()];
        let mut heap = BinaryHeap::new();
        let mut seed = |v: VertexId, d: f64, heap: &mut BinaryHeap<Entry>| {
            if d < dist[v.0] {
                dist[v.0] = d;
                heap.push(Entry { dist: d, vertex: v.0 });
            }
        };
        for src in sources {
            let e = g.edge(src.edge);
            seed(e.tail, src.s, &mut heap);
            if let Some(h) = e.head {
                seed(h, e.length - src.s, &mut heap);
            }
        }
        while let Some(Entry { dist: d, vertex }) = heap.pop() {
            if d > dist[vertex] {
                continue;
            }
            for &(eid, _) in g.incident(VertexId(vertex)) {
                let e = g.edge(eid);
                let Some(head) = e.head else { continue };
                for next in [e.tail, head] {
                    let nd = d + e.length;
                    if nd < dist[next.0] {
                        dist[next.0] = nd;
                        heap.push(Entry {
                            dist: nd,
                            vertex: next.0,
                        });
                    }
                }
            }
        }
        Self {
            vertex_dist: dist,
            sources: sources.to_vec(),
        }
    }

    pub fn vertex(&self, v: VertexId) -> f64 {
        self.vertex_dist[v.0]
    }

    pub fn at(&self, g: &MetricGraph, p: GraphPoint) -> f64 {
        self.on_edge(g, p.edge, p.s)
    }

    /// Distance at coordinate `s` of edge `edge`.
    pub fn on_edge(&self, g: &MetricGraph, edge: EdgeId, s: f64) -> f64 {
        let e = g.edge(edge);
        let mut best = self.vertex_dist[e.tail.0] + s;
        if let Some(h) = e.head {
            best = best.min(self.vertex_dist[h.0] + (e.length - s));
        }
        for src in &self.sources {
            if src.edge == edge {
                best = best.min((src.s - s).abs());
            }
        }
        best
    }
}

pub fn distance(g: &MetricGraph, a: GraphPoint, b: GraphPoint) -> f64 {
    DistanceField::new(g, &[a]).at(g, b)
}

pub fn distance_to_set(g: &MetricGraph, x: GraphPoint, centers: &[GraphPoint]) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::Empty("center set"));
    }
    Ok(DistanceField::new(g, centers).at(g, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{interval, star_graph, tadpole, three_bridge, GraphBuilder};
    use proptest::prelude::*;

    fn pt(g: &MetricGraph, e: usize, s: f64) -> GraphPoint {
        GraphPoint::new(g, EdgeId(e), s).unwrap()
    }

    #[test]
    fn three_bridge_midpoints() {
        let g = three_bridge();
        assert!((distance(&g, pt(&g, 0, 0.5), pt(&g, 1, 0.5)) - 1.0).abs() < 1e-15);
        let centers = [pt(&g, 0, 0.5), pt(&g, 1, 0.5)];
        let d = distance_to_set(&g, pt(&g, 2, 0.5), &centers).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_point_is_zero() {
        let g = three_bridge();
        assert_eq!(distance(&g, pt(&g, 2, 0.3), pt(&g, 2, 0.3)), 0.0);
    }

    #[test]
    fn interval_set_distance() {
        let g = interval(1.0).unwrap();
        let d = distance_to_set(&g, pt(&g, 0, 0.3), &[pt(&g, 0, 0.0), pt(&g, 0, 1.0)]).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
        assert!(distance_to_set(&g, pt(&g, 0, 0.3), &[]).is_err());
    }

    #[test]
    fn tadpole_loop_to_half_line() {
        // paths from loop coordinate 0.5 to the vertex: 0.5 one way, 1.5 the
        // other; then 1 along the half-line
        let g = tadpole(2.0, 1).unwrap();
        let d = distance(&g, pt(&g, 0, 0.5), pt(&g, 1, 1.0));
        let enumerated = [0.5_f64, 2.0 - 0.5].iter().fold(f64::INFINITY, |m, &a| m.min(a)) + 1.0;
        assert!((d - enumerated).abs() < 1e-15);
        assert!((d - 1.5).abs() < 1e-15);
    }

    #[test]
    fn same_edge_shortcut_through_loop() {
        let g = tadpole(2.0, 1).unwrap();
        // 0.1 and 1.9 on the loop are 0.2 apart through the vertex
        let d = distance(&g, pt(&g, 0, 0.1), pt(&g, 0, 1.9));
        assert!((d - 0.2).abs() < 1e-14);
    }

    #[test]
    fn star_line_distance() {
        let g = star_graph(2).unwrap();
        assert!((distance(&g, pt(&g, 0, 2.0), pt(&g, 1, 3.0)) - 5.0).abs() < 1e-15);
    }

    /// Brute force: refine every bounded edge into `n` pieces and every
    /// half-line up to `cap`, add the two query points as virtual nodes and run
    /// an O(V^2) Dijkstra on the resulting weighted graph.
    fn brute_force(g: &MetricGraph, a: GraphPoint, b: GraphPoint, n: usize, cap: f64) -> f64 {
        let mut coords: Vec<Vec<f64>> = g
            .edges()
            .iter()
            .map(|e| {
                let len = if e.length.is_finite() { e.length } else { cap };
                (0..=n).map(|j| len * j as f64 / n as f64).collect()
            })
            .collect();
        for p in [a, b] {
            coords[p.edge.0].push(p.s);
        }
        for c in &mut coords {
            c.sort_by(f64::total_cmp);
            c.dedup();
        }
        // node ids: vertices first, then edge-interior nodes
        let nv = g.vertex_count();
        let mut ids: Vec<Vec<usize>> = Vec::new();
        let mut count = nv;
        for (k, c) in coords.iter().enumerate() {
            let e = &g.edges()[k];
            let mut row = Vec::new();
            for (j, _) in c.iter().enumerate() {
                if j == 0 {
                    row.push(e.tail.0);
                } else if j == c.len() - 1 && e.head.is_some() {
                    row.push(e.head.unwrap().0);
                } else {
                    row.push(count);
                    count += 1;
                }
            }
            ids.push(row);
        }
        let mut adj = vec![Vec::new(); count];
        for (k, c) in coords.iter().enumerate() {
            for j in 1..c.len() {
                let (u, v, w) = (ids[k][j - 1], ids[k][j], c[j] - c[j - 1]);
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        let node = |p: GraphPoint| {
            let j = coords[p.edge.0].iter().position(|&x| x == p.s).unwrap();
            ids[p.edge.0][j]
        };
        let (sa, sb) = (node(a), node(b));
        let mut dist = vec![f64::INFINITY; count];
        let mut done = vec![false; count];
        dist[sa] = 0.0;
        for _ in 0..count {
            let u = (0..count)
                .filter(|&i| !done[i])
                .min_by(|&i, &j| dist[i].total_cmp(&dist[j]))
                .unwrap();
            done[u] = true;
            for &(v, w) in &adj[u] {
                dist[v] = dist[v].min(dist[u] + w);
            }
        }
        dist[sb]
    }

    fn random_graph() -> impl Strategy<Value = MetricGraph> {
        (2usize..5, prop::collection::vec((0usize..5, 0usize..5, 0.2f64..3.0), 1..6), 0usize..3)
            .prop_map(|(nv, extra, nh)| {
                let mut b = GraphBuilder::default();
                for i in 0..nv {
                    b = b.vertex(&format!("v{i}"));
                }
                // spanning path keeps it connected
                for i in 1..nv {
                    b = b.edge(&format!("p{i}"), &format!("v{}", i - 1), &format!("v{i}"), 0.5 + i as f64 * 0.3);
                }
                for (k, (t, h, len)) in extra.into_iter().enumerate() {
                    b = b.edge(&format!("x{k}"), &format!("v{}", t % nv), &format!("v{}", h % nv), len);
                }
                for k in 0..nh {
                    b = b.half_line(&format!("h{k}"), &format!("v{}", k % nv));
                }
                b.build().unwrap()
            })
    }

    fn random_point(g: &MetricGraph, e: usize, frac: f64) -> GraphPoint {
        let ed = &g.edges()[e % g.edge_count()];
        let len = if ed.length.is_finite() { ed.length } else { 4.0 };
        GraphPoint::new(g, ed.id, frac * len).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metric_axioms(g in random_graph(), ea in 0usize..20, eb in 0usize..20, ec in 0usize..20,
                         fa in 0.0f64..1.0, fb in 0.0f64..1.0, fc in 0.0f64..1.0) {
            let (a, b, c) = (random_point(&g, ea, fa), random_point(&g, eb, fb), random_point(&g, ec, fc));
            let dab = distance(&g, a, b);
            let dba = distance(&g, b, a);
            prop_assert!((dab - dba).abs() <= 1e-12 * (1.0 + dab));
            prop_assert!(distance(&g, a, c) <= dab + distance(&g, b, c) + 1e-12);
            prop_assert_eq!(distance(&g, a, a), 0.0);
            if !a.same_as(&g, &b) {
                prop_assert!(dab > 0.0);
            }
        }

        #[test]
        fn matches_refined_dijkstra(g in random_graph(), ea in 0usize..20, eb in 0usize..20,
                                    fa in 0.0f64..1.0, fb in 0.0f64..1.0) {
            let (a, b) = (random_point(&g, ea, fa), random_point(&g, eb, fb));
            let expect = brute_force(&g, a, b, 3, 8.0);
            prop_assert!((distance(&g, a, b) - expect).abs() < 1e-10, "{} vs {}", distance(&g, a, b), expect);
        }
    }
}
