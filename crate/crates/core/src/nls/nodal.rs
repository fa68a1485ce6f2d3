use serde::Serialize;

use crate::coeff::Coefficient;
use crate::graph::MetricGraph;
use crate::grid::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodalCount {
    /// Connected components of `{u ≠ 0}`.
    pub total: usize,
    /// Components meeting an edge on which `ρ` is not identically zero.
    pub outside_g0: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Nodal zones of a sampled function. Samples with `|u| <= 1e-7 |u|_∞` count
/// as zero; neighbouring nonzero samples of equal sign are joined, and a
/// vertex joins its incident edges. A zero at a vertex separates them.
pub fn count_nodal_zones(g: &MetricGraph, u: &GridFunction, rho: &Coefficient) -> NodalCount {
    let tol = 1e-7 * u.max_abs();
    let sign = |v: f64| -> i8 {
        if v.abs() <= tol {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let nv = g.vertex_count();
    let mut signs: Vec<i8> = g.vertices().map(|v| sign(u.vertex_value(v))).collect();
    // per node: whether it touches an edge carrying the nonlinearity
    let mut nonlinear: Vec<bool> = vec![false; nv];
    let mut links = Vec::new();
    for e in g.edges() {
        let s = u.edge(e.id);
        let active = !rho.edge(e.id).is_zero();
        let n = s.grid.n;
        let mut prev = e.tail.0;
        if active {
            nonlinear[e.tail.0] = true;
        }
        for j in 1..n {
            let node = if j == n - 1 && e.is_bounded() {
                let h = e.head.expect("bounded").0;
                if active {
                    nonlinear[h] = true;
                }
                h
            } else {
                signs.push(sign(s.u[j]));
                nonlinear.push(active);
                signs.len() - 1
            };
            links.push((prev, node));
            prev = node;
        }
    }
    let mut uf = UnionFind((0..signs.len()).collect());
    for (a, b) in links {
        if signs[a] != 0 && signs[a] == signs[b] {
            uf.union(a, b);
        }
    }
    let mut roots: Vec<(usize, bool)> = Vec::new();
    for i in 0..signs.len() {
        if signs[i] == 0 {
            continue;
        }
        let r = uf.find(i);
        match roots.iter_mut().find(|(root, _)| *root == r) {
            Some(entry) => entry.1 |= nonlinear[i],
            None => roots.push((r, nonlinear[i])),
        }
    }
    NodalCount {
        total: roots.len(),
        outside_g0: roots.iter().filter(|(_, nl)| *nl).count(),
    }
}
