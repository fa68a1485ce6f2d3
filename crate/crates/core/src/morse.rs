//! Morse index of a solution: negative eigenvalues of the linearized form
//! `Q_u(φ) = ∫ |φ'|² + (W + λ) φ² - (p - 1) ρ |u|^{p-2} φ²`
//! on P1 elements, with half-lines truncated by a Dirichlet node.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{FemMesh, Pencil, SymMatrix};
use crate::graph::{EdgeId, MetricGraph};
use crate::nls::SolutionCandidate;

#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub mesh: FemMesh,
    pub a: SymMatrix,
    pub m: SymMatrix,
    pub h: f64,
    pub r_tr: Option<f64>,
    /// `sup |W + λ - (p - 1) ρ |u|^{p-2}|` over the mesh nodes.
    pub potential_sup: f64,
}

impl QuadraticForm {
    /// Eigenvalues within `tol_neg` of zero are indeterminate.
    pub fn tol_neg(&self) -> f64 {
        1e-8 * self.potential_sup.max(1.0)
    }
}

/// `max(50, 25/√λ)`.
pub fn default_truncation(lambda: f64) -> f64 {
    if lambda > 0.0 {
        (25.0 / lambda.sqrt()).max(50.0)
    } else {
        50.0
    }
}

/// `min(ℓ_min/50, 0.05/max(1, √|λ|))`.
pub fn default_morse_h(g: &MetricGraph, lambda: f64) -> f64 {
    let lmin = g.min_bounded_length().unwrap_or(1.0);
    (lmin / 50.0).min(0.05 / lambda.abs().sqrt().max(1.0))
}

/// A closed interval `[start, end]` of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeInterval {
    pub edge: EdgeId,
    pub start: f64,
    pub end: f64,
}

fn build(c: &SolutionCandidate, mesh: FemMesh, h: f64, r_tr: Option<f64>) -> QuadraticForm {
    let prob = c.prob();
    let u = c.u();
    let f = |e: EdgeId, s: f64| {
        let v = u.eval(e, s).0;
        prob.w.eval(e, s) + prob.lambda - (prob.p - 1.0) * prob.rho.eval(e, s) * v.abs().powf(prob.p - 2.0)
    };
    let potential_sup = mesh
        .edges()
        .iter()
        .flat_map(|em| (0..=em.cells()).map(move |j| (em.edge, em.x(j))))
        .map(|(e, s)| f(e, s).abs())
        .fold(0.0, f64::max);
    let a = mesh.stiffness().add_scaled(1.0, &mesh.potential(f));
    let m = mesh.mass();
    QuadraticForm {
        mesh,
        a,
        m,
        h,
        r_tr,
        potential_sup,
    }
}

fn resolve_truncation(g: &MetricGraph, c: &SolutionCandidate, r_tr: Option<f64>) -> Result<Option<f64>> {
    if g.half_lines().next().is_none() {
        return Ok(None);
    }
    let r = r_tr.unwrap_or_else(|| default_truncation(c.lambda()));
    let scale = c.u().max_abs();
    for e in g.half_lines() {
        let tail = c.u().eval(e.id, r).0.abs();
        if tail > 1e-6 * scale {
            return Err(Error::Truncation(format!(
                "|u| = {tail:e} at R = {r} on '{}' exceeds 1e-6 |u|_inf",
                e.name
            )));
        }
    }
    Ok(Some(r))
}

/// The form on the full mesh.
pub fn quadratic_form(g: &MetricGraph, c: &SolutionCandidate, h: f64, r_tr: Option<f64>) -> Result<QuadraticForm> {
    let r = resolve_truncation(g, c, r_tr)?;
    let mesh = FemMesh::new(g, h, r)?;
    Ok(build(c, mesh, h, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorseReport {
    pub index: usize,
    /// Distance from zero of the eigenvalues on either side of it.
    pub gap: f64,
    pub tol_neg: f64,
    pub h: f64,
    pub r_tr: Option<f64>,
    pub dofs: usize,
}

fn count(q: &QuadraticForm) -> Result<MorseReport> {
    let tol = q.tol_neg();
    let base = MorseReport {
        index: 0,
        gap: f64::INFINITY,
        tol_neg: tol,
        h: q.h,
        r_tr: q.r_tr,
        dofs: q.mesh.dofs(),
    };
    if q.mesh.dofs() == 0 {
        return Ok(base);
    }
    let pencil = Pencil::new(&q.mesh, &q.a, &q.m)?;
    let below = pencil.count_below(-tol)?;
    let near = pencil.count_below(tol)?;
    let values = pencil.smallest_eigenvalues((below + 1).min(q.mesh.dofs()))?;
    if near > below {
        return Err(Error::Indeterminate {
            eigenvalue: values[below],
            tol,
        });
    }
    let mut gap = values.get(below).map_or(f64::INFINITY, |v| v.abs());
    if below > 0 {
        gap = gap.min(values[below - 1].abs());
    }
    Ok(MorseReport {
        index: below,
        gap,
        ..base
    })
}

/// Eigenvalues of `Q_u` strictly below `-tol_neg`. `r_tr = None` uses
/// [`default_truncation`] on graphs with half-lines.
pub fn morse_index(g: &MetricGraph, c: &SolutionCandidate, h: f64, r_tr: Option<f64>) -> Result<MorseReport> {
    count(&quadratic_form(g, c, h, r_tr)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseStudy {
    /// Index at the finest mesh.
    pub index: usize,
    /// Runs at `h`, `h/2`, `h/4`, then `h` with doubled truncation.
    pub runs: Vec<MorseReport>,
    /// All runs agree.
    pub stable: bool,
}

/// [`morse_index`] over three refinements and a doubled truncation radius.
pub fn morse_index_study(g: &MetricGraph, c: &SolutionCandidate, h: f64, r_tr: Option<f64>) -> Result<MorseStudy> {
    let r = resolve_truncation(g, c, r_tr)?;
    let mut runs = Vec::new();
    for k in 0..3 {
        runs.push(morse_index(g, c, h / f64::powi(2.0, k), r)?);
    }
    if let Some(r) = r {
        runs.push(morse_index(g, c, h, Some(2.0 * r))?);
    }
    let index = runs[2].index;
    let stable = runs.iter().all(|x| x.index == index);
    Ok(MorseStudy { index, runs, stable })
}

/// Negative directions of `Q_u` among test functions vanishing on
/// `compact_set` (and outside the truncation).
pub fn exterior_morse_index(
    g: &MetricGraph,
    c: &SolutionCandidate,
    compact_set: &[EdgeInterval],
    h: f64,
    r_tr: Option<f64>,
) -> Result<MorseReport> {
    for iv in compact_set {
        if iv.edge.0 >= g.edge_count() || !(iv.start <= iv.end) || iv.start < 0.0 || iv.end > g.edge(iv.edge).length {
            return Err(Error::InvalidArgument(format!("bad interval {iv:?}")));
        }
    }
    let r = resolve_truncation(g, c, r_tr)?;
    let full = FemMesh::new(g, h, r)?;
    let tol = 1e-12 * h;
    let mesh = full.constrained(g, |e, s| {
        compact_set
            .iter()
            .any(|iv| iv.edge == e && s >= iv.start - tol && s <= iv.end + tol)
    });
    count(&build(c, mesh, h, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::NlsProblem;
    use crate::graph::{circle, star_graph, VertexId};
    use crate::grid::{EdgeGrid, GridFunction};
    use crate::nls::{build_three_bridge_eigenfunction, solve_stationary, EdgeParam, Guess, ShootingUnknowns, SolveOptions};
    use std::f64::consts::PI;

    fn line_soliton(lambda: f64) -> (MetricGraph, SolutionCandidate) {
        let g = star_graph(2).unwrap();
        let prob = NlsProblem::standard(&g, 4.0, lambda).unwrap();
        let x = ShootingUnknowns {
            vertex_values: vec![(2.0 * lambda).sqrt()],
            edges: vec![EdgeParam::Soliton { shift: 0.0, sign: 1.0 }; 2],
        };
        let out = solve_stationary(&g, &prob, Guess::Unknowns(x), SolveOptions::default()).unwrap();
        assert!(out.converged);
        (g, out.candidate)
    }

    #[test]
    fn soliton_index_one_and_exterior_zero() {
        let (g, c) = line_soliton(1.0);
        let study = morse_index_study(&g, &c, 0.05, None).unwrap();
        assert!(study.stable, "{study:?}");
        assert_eq!(study.index, 1);
        let ball = [
            EdgeInterval { edge: EdgeId(0), start: 0.0, end: 5.0 },
            EdgeInterval { edge: EdgeId(1), start: 0.0, end: 5.0 },
        ];
        assert_eq!(exterior_morse_index(&g, &c, &ball, 0.05, None).unwrap().index, 0);
        assert_eq!(exterior_morse_index(&g, &c, &[], 0.05, None).unwrap().index, 1);
    }

    #[test]
    fn zero_function_has_index_zero() {
        let g = star_graph(3).unwrap();
        let prob = NlsProblem::standard(&g, 4.0, 1.0).unwrap();
        let grids = vec![EdgeGrid::new(60.0, 11).unwrap(); 3];
        let u = GridFunction::zeros(&g, &grids);
        let c = SolutionCandidate::new(&g, u, prob, 0.0).unwrap();
        assert_eq!(morse_index(&g, &c, 0.1, None).unwrap().index, 0);
        let iv = [EdgeInterval { edge: EdgeId(1), start: 0.0, end: 2.0 }];
        assert_eq!(exterior_morse_index(&g, &c, &iv, 0.1, None).unwrap().index, 0);
    }

    #[test]
    fn three_bridge_form_is_shifted_laplacian() {
        let ex = build_three_bridge_eigenfunction(1, [0.0, 1.0, -1.0, 0.0]).unwrap();
        let q = quadratic_form(&ex.graph, &ex.candidate, 0.05, None).unwrap();
        let expected = q.mesh.stiffness().add_scaled(-PI * PI, &q.m);
        for i in 0..q.mesh.dofs() {
            for j in 0..q.mesh.dofs() {
                assert!((q.a.get(i, j) - expected.get(i, j)).abs() < 1e-10 * (1.0 + expected.get(i, j).abs()));
            }
        }
    }

    #[test]
    fn three_bridge_indices() {
        for (k, idx) in [(1u32, 1usize), (2, 4)] {
            let ex = build_three_bridge_eigenfunction(k, [0.0, 1.0, -1.0, 0.0]).unwrap();
            let study = morse_index_study(&ex.graph, &ex.candidate, 0.01, None).unwrap();
            assert!(study.stable);
            assert_eq!(study.index, idx);
        }
    }

    #[test]
    fn constant_on_circle() {
        let g = circle(2.0 * PI).unwrap();
        let lambda = 1.01;
        let prob = NlsProblem::standard(&g, 4.0, lambda).unwrap();
        let c0 = lambda.sqrt();
        let grids = [EdgeGrid::with_spacing(2.0 * PI, 0.01).unwrap()];
        let (u, gap) = GridFunction::sample(&g, &grids, vec![None], |_, _| (c0, 0.0)).unwrap();
        let c = SolutionCandidate::new(&g, u, prob, gap).unwrap();
        assert!(c.report().passes(1e-12));
        assert_eq!(c.u().vertex_value(VertexId(0)), c0);
        let study = morse_index_study(&g, &c, 0.05, None).unwrap();
        assert!(study.stable);
        assert_eq!(study.index, 3);
    }

    #[test]
    fn truncation_too_short_is_rejected() {
        let (g, c) = line_soliton(1.0);
        assert!(matches!(morse_index(&g, &c, 0.1, Some(3.0)), Err(Error::Truncation(_))));
    }
}
