//! P1 finite elements on metric graphs and a structured symmetric solver.
//!
//! Vertex values are shared degrees of freedom, so continuity is built in
//! and Kirchhoff is the natural condition. Half-lines are truncated with a
//! Dirichlet node at the truncation point. Vertex dofs are numbered first.
//! Eliminating the interior chains of every edge leaves a small dense Schur
//! complement on the vertices and a few separator nodes, which gives inertia
//! counts and solves in linear time in the number of interior nodes.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, EndRole, MetricGraph};
use crate::util::GAUSS4;

/// Symmetric sparse matrix stored as diagonal plus upper off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    diag: Vec<f64>,
    upper: HashMap<(usize, usize), f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            diag: vec![0.0; n],
            upper: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Add `v` to entries `(i, j)` and `(j, i)` (once if `i == j`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.diag[i] += v;
        } else {
            *self.upper.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.upper.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn nnz_upper(&self) -> usize {
        self.upper.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for (&(i, j), &a) in &self.upper {
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
        y
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        for (d, o) in out.diag.iter_mut().zip(&other.diag) {
            *d += c * o;
        }
        for (&k, &v) in &other.upper {
            *out.upper.entry(k).or_insert(0.0) += c * v;
        }
        out
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows: Vec<f64> = self.diag.iter().map(|d| d.abs()).collect();
        for (&(i, j), &a) in &self.upper {
            rows[i] += a.abs();
            rows[j] += a.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for (&(i, j), &a) in &self.upper {
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
        m
    }
}

/// Nodes of one edge, `nodes[j]` at `s = span * j / cells`; `None` marks a
/// Dirichlet node.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMesh {
    pub edge: EdgeId,
    pub span: f64,
    pub nodes: Vec<Option<usize>>,
}

impl EdgeMesh {
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.span / self.cells() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.cells() {
            self.span
        } else {
            self.span * j as f64 / self.cells() as f64
        }
    }
}

/// Degree-of-freedom map. Free vertex dofs are `0..vertex_dof_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct FemMesh {
    dofs: usize,
    vertex_dofs: Vec<Option<usize>>,
    edges: Vec<EdgeMesh>,
}

impl FemMesh {
    /// `ceil(ℓ/h)` cells per bounded edge (at least 2); half-lines are cut at
    /// `truncation` with a Dirichlet end node.
    pub fn new(g: &MetricGraph, h: f64, truncation: Option<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("mesh size must be positive, got {h}")));
        }
        if g.half_lines().next().is_some() {
            match truncation {
                None => return Err(Error::NonCompact),
                Some(r) if !(r > 0.0 && r.is_finite()) => {
                    return Err(Error::InvalidArgument(format!("truncation must be positive, got {r}")))
                }
                _ => {}
            }
        }
        let nv = g.vertex_count();
        let mut next = nv;
        let edges = g
            .edges()
            .iter()
            .map(|e| {
                let span = if e.is_bounded() {
                    e.length
                } else {
                    truncation.expect("checked")
                };
                let cells = ((span / h - 1e-9).ceil() as usize).max(2);
                let nodes = (0..=cells)
                    .map(|j| {
                        if j == 0 {
                            Some(e.tail.0)
                        } else if j == cells {
                            e.head.map(|v| v.0)
                        } else {
                            next += 1;
                            Some(next - 1)
                        }
                    })
                    .collect();
                EdgeMesh {
                    edge: e.id,
                    span,
                    nodes,
                }
            })
            .collect();
        Ok(Self {
            dofs: next,
            vertex_dofs: (0..nv).map(Some).collect(),
            edges,
        })
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn vertex_dof_count(&self) -> usize {
        self.vertex_dofs.iter().flatten().count()
    }

    pub fn edges(&self) -> &[EdgeMesh] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeMesh {
        &self.edges[e.0]
    }

    pub fn min_h(&self) -> f64 {
        self.edges.iter().map(EdgeMesh::h).fold(f64::INFINITY, f64::min)
    }

    /// Same mesh with every node at which `fixed(edge, s)` holds turned into a
    /// Dirichlet node. A vertex is fixed if any of its edge ends is.
    pub fn constrained<F: Fn(EdgeId, f64) -> bool>(&self, g: &MetricGraph, fixed: F) -> Self {
        let fixed_vertex: Vec<bool> = g
            .vertices()
            .map(|v| {
                g.incident(v).iter().any(|&(e, role)| {
                    let s = match role {
                        EndRole::Tail => 0.0,
                        EndRole::Head => g.edge(e).length,
                    };
                    fixed(e, s)
                })
            })
            .collect();
        let mut next = 0;
        let mut renumber: HashMap<usize, usize> = HashMap::new();
        let vertex_dofs: Vec<Option<usize>> = self
            .vertex_dofs
            .iter()
            .enumerate()
            .map(|(v, d)| match d {
                Some(old) if !fixed_vertex[v] => {
                    renumber.insert(*old, next);
                    next += 1;
                    Some(next - 1)
                }
                _ => None,
            })
            .collect();
        let nvert = self.vertex_dofs.len();
        let edges = self
            .edges
            .iter()
            .map(|em| {
                let cells = em.cells();
                let nodes = em
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(j, d)| {
                        let old = (*d)?;
                        if old < nvert {
                            return renumber.get(&old).copied();
                        }
                        if fixed(em.edge, em.x(j)) || j == 0 || j == cells {
                            return None;
                        }
                        next += 1;
                        Some(next - 1)
                    })
                    .collect();
                EdgeMesh {
                    edge: em.edge,
                    span: em.span,
                    nodes,
                }
            })
            .collect();
        Self {
            dofs: next,
            vertex_dofs,
            edges,
        }
    }

    fn assemble<F: Fn(&EdgeMesh, usize) -> [[f64; 2]; 2]>(&self, local: F) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.dofs);
        for em in &self.edges {
            for c in 0..em.cells() {
                let loc = local(em, c);
                let ends = [em.nodes[c], em.nodes[c + 1]];
                for r in 0..2 {
                    for k in 0..2 {
                        if let (Some(i), Some(j)) = (ends[r], ends[k]) {
                            if i <= j {
                                m.add(i, j, loc[r][k]);
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// `∫ φ_i' φ_j'`.
    pub fn stiffness(&self) -> SymMatrix {
        self.assemble(|em, _| {
            let k = 1.0 / em.h();
            [[k, -k], [-k, k]]
        })
    }

    /// `∫ φ_i φ_j`.
    pub fn mass(&self) -> SymMatrix {
        self.assemble(|em, _| {
            let h = em.h();
            [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]]
        })
    }

    /// `∫ f φ_i φ_j` with four-point Gauss quadrature per cell.
    pub fn potential<F: Fn(EdgeId, f64) -> f64>(&self, f: F) -> SymMatrix {
        self.assemble(|em, c| {
            let (x0, h) = (em.x(c), em.h());
            let mut loc = [[0.0; 2]; 2];
            for (&t, &w) in GAUSS4.0.iter().zip(&GAUSS4.1) {
                let fv = f(em.edge, x0 + t * h) * w * h;
                let b = [1.0 - t, t];
                for r in 0..2 {
                    for k in 0..2 {
                        loc[r][k] += fv * b[r] * b[k];
                    }
                }
            }
            loc
        })
    }

    /// Nodal values of `x` along edge `e` (zero at Dirichlet nodes).
    pub fn edge_values(&self, x: &[f64], e: EdgeId) -> Vec<f64> {
        self.edges[e.0]
            .nodes
            .iter()
            .map(|d| d.map_or(0.0, |i| x[i]))
            .collect()
    }

    /// Nodal interpolant of a function on the graph.
    pub fn interpolate<F: Fn(EdgeId, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut x = vec![0.0; self.dofs];
        for em in &self.edges {
            for (j, d) in em.nodes.iter().enumerate() {
                if let Some(i) = d {
                    x[*i] = f(em.edge, em.x(j));
                }
            }
        }
        x
    }
}

#[derive(Debug, Clone)]
struct Chain {
    dofs: Vec<usize>,
    a_diag: Vec<f64>,
    a_off: Vec<f64>,
    m_diag: Vec<f64>,
    m_off: Vec<f64>,
    /// Vertex dof and its `(A, M)` coupling to the first / last chain node.
    left: Option<(usize, f64, f64)>,
    right: Option<(usize, f64, f64)>,
}

/// Edge fractions at which interior nodes join the Schur complement. Edge
/// interiors of equilateral graphs share eigenvalues with the whole graph;
/// cutting them at irrational fractions keeps the eliminated blocks well
/// conditioned near the spectrum.
const SEPARATORS: [f64; 2] = [0.381_966_011_250_105, 0.723_606_797_749_979];

/// The pencil `A - σ M` on a [`FemMesh`], ready for inertia counts and solves.
#[derive(Debug, Clone)]
pub struct Pencil {
    n: usize,
    nv: usize,
    /// Separator dofs: free vertices plus a few interior nodes per edge.
    seps: Vec<usize>,
    chains: Vec<Chain>,
    a_vv: DMatrix<f64>,
    m_vv: DMatrix<f64>,
}

struct ChainFactor {
    d: Vec<f64>,
    l: Vec<f64>,
    cl: f64,
    cr: f64,
}

impl ChainFactor {
    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for k in 1..n {
            b[k] -= self.l[k] * b[k - 1];
        }
        for k in 0..n {
            b[k] /= self.d[k];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            b[k] -= self.l[k + 1] * b[k + 1];
        }
    }
}

/// LDLᵀ factorization of `A - σ M`.
pub struct Factor<'a> {
    pencil: &'a Pencil,
    chains: Vec<ChainFactor>,
    schur: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    negatives: usize,
    /// Smallest pivot or Schur eigenvalue in absolute value, relative to the
    /// matrix scale.
    pub min_pivot: f64,
}

impl Factor<'_> {
    /// Eigenvalues of the pencil below `σ`.
    pub fn negatives(&self) -> usize {
        self.negatives
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let p = self.pencil;
        let mut x = vec![0.0; p.n];
        let mut rhs_v = DVector::from_iterator(p.nv, p.seps.iter().map(|&i| b[i]));
        let mut ys = Vec::with_capacity(p.chains.len());
        for (ch, f) in p.chains.iter().zip(&self.chains) {
            let mut y: Vec<f64> = ch.dofs.iter().map(|&i| b[i]).collect();
            f.solve(&mut y);
            if let Some((v, _, _)) = ch.left {
                rhs_v[v] -= f.cl * y[0];
            }
            if let Some((v, _, _)) = ch.right {
                rhs_v[v] -= f.cr * y[y.len() - 1];
            }
            ys.push(y);
        }
        let xv = match &self.schur {
            Some(lu) => lu
                .solve(&rhs_v)
                .ok_or_else(|| Error::Eigen("singular vertex Schur complement".into()))?,
            None => rhs_v,
        };
        for (&i, v) in p.seps.iter().zip(xv.iter()) {
            x[i] = *v;
        }
        for (ch, f) in p.chains.iter().zip(&self.chains) {
            let mut r: Vec<f64> = ch.dofs.iter().map(|&i| b[i]).collect();
            let last = r.len() - 1;
            if let Some((v, _, _)) = ch.left {
                r[0] -= f.cl * xv[v];
            }
            if let Some((v, _, _)) = ch.right {
                r[last] -= f.cr * xv[v];
            }
            f.solve(&mut r);
            for (&i, val) in ch.dofs.iter().zip(r) {
                x[i] = val;
            }
        }
        Ok(x)
    }
}

impl Pencil {
    pub fn new(mesh: &FemMesh, a: &SymMatrix, m: &SymMatrix) -> Result<Self> {
        let n = mesh.dofs();
        if a.dim() != n || m.dim() != n {
            return Err(Error::InvalidArgument("matrix dimensions do not match the mesh".into()));
        }
        let mut sep: Vec<Option<usize>> = vec![None; n];
        let mut seps: Vec<usize> = Vec::new();
        let mut mark = |i: usize, sep: &mut Vec<Option<usize>>| {
            if sep[i].is_none() {
                sep[i] = Some(seps.len());
                seps.push(i);
            }
        };
        for i in 0..mesh.vertex_dof_count() {
            mark(i, &mut sep);
        }
        for em in mesh.edges() {
            let cells = em.cells();
            for frac in SEPARATORS {
                let j = (frac * cells as f64).round() as usize;
                if j > 0 && j < cells {
                    if let Some(i) = em.nodes[j] {
                        mark(i, &mut sep);
                    }
                }
            }
        }
        let nv = seps.len();
        let mut chains = Vec::new();
        for em in mesh.edges() {
            let mut run: Vec<usize> = Vec::new();
            let mut before: Option<usize> = None;
            for d in em.nodes.iter() {
                let brk = match *d {
                    Some(i) => sep[i],
                    None => None,
                };
                match *d {
                    Some(i) if brk.is_none() => run.push(i),
                    _ => {
                        if !run.is_empty() {
                            chains.push(Self::chain(a, m, &seps, std::mem::take(&mut run), before, brk));
                        }
                        before = brk;
                    }
                }
            }
            if !run.is_empty() {
                chains.push(Self::chain(a, m, &seps, run, before, None));
            }
        }
        let mut a_vv = DMatrix::zeros(nv, nv);
        let mut m_vv = DMatrix::zeros(nv, nv);
        for (r, &i) in seps.iter().enumerate() {
            for (c, &j) in seps.iter().enumerate() {
                a_vv[(r, c)] = a.get(i, j);
                m_vv[(r, c)] = m.get(i, j);
            }
        }
        Ok(Self {
            n,
            nv,
            seps,
            chains,
            a_vv,
            m_vv,
        })
    }

    fn chain(
        a: &SymMatrix,
        m: &SymMatrix,
        seps: &[usize],
        dofs: Vec<usize>,
        left: Option<usize>,
        right: Option<usize>,
    ) -> Chain {
        let couple = |v: Option<usize>, i: usize| v.map(|v| (v, a.get(seps[v], i), m.get(seps[v], i)));
        let first = dofs[0];
        let last = dofs[dofs.len() - 1];
        Chain {
            a_diag: dofs.iter().map(|&i| a.get(i, i)).collect(),
            m_diag: dofs.iter().map(|&i| m.get(i, i)).collect(),
            a_off: dofs.windows(2).map(|w| a.get(w[0], w[1])).collect(),
            m_off: dofs.windows(2).map(|w| m.get(w[0], w[1])).collect(),
            left: couple(left, first),
            right: couple(right, last),
            dofs,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor(&self, sigma: f64) -> Result<Factor<'_>> {
        let mut s = &self.a_vv - &self.m_vv * sigma;
        let mut negatives = 0;
        let mut min_pivot = f64::INFINITY;
        let mut factors = Vec::with_capacity(self.chains.len());
        for ch in &self.chains {
            let n = ch.dofs.len();
            let diag: Vec<f64> = ch.a_diag.iter().zip(&ch.m_diag).map(|(a, m)| a - sigma * m).collect();
            let off: Vec<f64> = ch.a_off.iter().zip(&ch.m_off).map(|(a, m)| a - sigma * m).collect();
            let mut d = vec![0.0; n];
            let mut l = vec![0.0; n];
            for k in 0..n {
                let scale = diag[k].abs() + if k > 0 { off[k - 1].abs() } else { 0.0 };
                let mut dk = diag[k];
                if k > 0 {
                    l[k] = off[k - 1] / d[k - 1];
                    dk -= l[k] * off[k - 1];
                }
                let floor = 1e-15 * scale.max(f64::MIN_POSITIVE);
                if dk.abs() < floor {
                    dk = floor;
                }
                min_pivot = min_pivot.min(dk.abs() / scale.max(f64::MIN_POSITIVE));
                if dk < 0.0 {
                    negatives += 1;
                }
                d[k] = dk;
            }
            if !(d.iter().all(|v| v.is_finite())) {
                return Err(Error::Eigen(format!("non-finite pivot at shift {sigma}")));
            }
            let cl = ch.left.map_or(0.0, |(_, a, m)| a - sigma * m);
            let cr = ch.right.map_or(0.0, |(_, a, m)| a - sigma * m);
            let f = ChainFactor { d, l, cl, cr };
            let t_col = |k: usize| {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                f.solve(&mut e);
                e
            };
            let c0 = t_col(0);
            let (t00, tn0) = (c0[0], c0[n - 1]);
            let tnn = if n == 1 { t00 } else { t_col(n - 1)[n - 1] };
            match (ch.left, ch.right) {
                (Some((vl, _, _)), Some((vr, _, _))) => {
                    s[(vl, vl)] -= cl * cl * t00;
                    s[(vr, vr)] -= cr * cr * tnn;
                    s[(vl, vr)] -= cl * cr * tn0;
                    s[(vr, vl)] -= cl * cr * tn0;
                }
                (Some((vl, _, _)), None) => s[(vl, vl)] -= cl * cl * t00,
                (None, Some((vr, _, _))) => s[(vr, vr)] -= cr * cr * tnn,
                (None, None) => {}
            }
            factors.push(f);
        }
        let schur = if self.nv > 0 {
            let eig = SymmetricEigen::new(s.clone()).eigenvalues;
            let scale = s.amax().max(f64::MIN_POSITIVE);
            negatives += eig.iter().filter(|&&e| e < 0.0).count();
            min_pivot = min_pivot.min(eig.iter().fold(f64::INFINITY, |m, e| m.min(e.abs())) / scale);
            Some(s.lu())
        } else {
            None
        };
        Ok(Factor {
            pencil: self,
            chains: factors,
            schur,
            negatives,
            min_pivot,
        })
    }

    /// Number of eigenvalues of `A v = μ M v` strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        Ok(self.factor(sigma)?.negatives())
    }

    fn bracket(&self, count: usize) -> Result<(f64, f64)> {
        let mut lo = -1.0;
        while self.count_below(lo)? > 0 {
            lo *= 4.0;
            if lo < -1e300 {
                return Err(Error::Eigen("no lower bound for the spectrum".into()));
            }
        }
        let mut hi = 1.0;
        while self.count_below(hi)? < count {
            hi *= 4.0;
            if hi > 1e300 {
                return Err(Error::Eigen("no upper bound for the spectrum".into()));
            }
        }
        Ok((lo, hi))
    }

    /// The `count` smallest eigenvalues by bisection on inertia counts.
    pub fn smallest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 || count > self.n {
            return Err(Error::InvalidArgument(format!(
                "requested {count} eigenvalues of a {}-dimensional pencil",
                self.n
            )));
        }
        let (lo0, hi0) = self.bracket(count)?;
        let mut out = Vec::with_capacity(count);
        let mut lo = lo0;
        for k in 0..count {
            let mut hi = hi0;
            let mut a = lo;
            while hi - a > 4.0 * f64::EPSILON * a.abs().max(hi.abs()).max(1e-300) && hi - a > 1e-300 {
                let mid = 0.5 * (a + hi);
                if mid <= a || mid >= hi {
                    break;
                }
                if self.count_below(mid)? > k {
                    hi = mid;
                } else {
                    a = mid;
                }
            }
            out.push(0.5 * (a + hi));
            lo = a;
        }
        Ok(out)
    }

    /// Eigenvectors for eigenvalues `values` (ascending, as returned by
    /// [`Self::smallest_eigenvalues`]) by shifted inverse iteration, with
    /// clusters of width `1e-8 (1 + |μ|)` handled as blocks. Vectors are
    /// `M`-orthonormal.
    pub fn eigenvectors(&self, m: &SymMatrix, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut start = 0;
        while start < values.len() {
            let mut end = start + 1;
            while end < values.len() && (values[end] - values[start]).abs() <= 1e-8 * (1.0 + values[start].abs()) {
                end += 1;
            }
            let mu = values[start];
            let shift = mu - 1e-4 * (1.0 + mu.abs());
            let f = self.factor(shift)?;
            let mut block: Vec<Vec<f64>> = (start..end)
                .map(|c| {
                    (0..self.n)
                        .map(|i| ((i as f64 + 1.0) * (0.618_033_988_75 + c as f64 * 0.414_213_562_37)).sin())
                        .collect()
                })
                .collect();
            for _ in 0..8 {
                for x in block.iter_mut() {
                    *x = f.solve(&m.matvec(x))?;
                }
                for i in 0..block.len() {
                    let (done, rest) = block.split_at_mut(i);
                    let x = &mut rest[0];
                    for prev in vecs.iter().chain(done.iter()) {
                        let c = dot(&m.matvec(prev), x);
                        for (a, b) in x.iter_mut().zip(prev) {
                            *a -= c * b;
                        }
                    }
                    let norm = dot(&m.matvec(x), x).sqrt();
                    if !(norm > 0.0 && norm.is_finite()) {
                        return Err(Error::Eigen("inverse iteration collapsed".into()));
                    }
                    x.iter_mut().for_each(|v| *v /= norm);
                }
            }
            vecs.extend(block);
            start = end;
        }
        Ok(vecs)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
