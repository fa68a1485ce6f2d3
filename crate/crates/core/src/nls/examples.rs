//! Explicit solutions: three-bridge eigenfunctions, compactly supported
//! tadpole solutions, four-star soliton families and the tadpole branch with a
//! localized nonlinearity.

use super::shooting::candidate_from_unknowns;
use super::{EdgeParam, ShootingUnknowns, SolutionCandidate, SolveOptions};
use crate::coeff::{Coefficient, NlsProblem};
use crate::error::{Error, Result};
use crate::graph::{four_star, star_graph, tadpole, three_bridge, MetricGraph};
use crate::grid::{EdgeGrid, GridFunction};
use crate::ode::{integrate, periodic_solution, soliton_state, OdeState, Tolerance};
use crate::spectral::eigenvalues;
use crate::util::bisect;

/// A graph with an explicit solution on it.
#[derive(Debug, Clone)]
pub struct BuiltExample {
    pub graph: MetricGraph,
    pub candidate: SolutionCandidate,
}

/// Three-bridge problem with `W ≡ 0` and `ρ = (0, 0, 1)` on `(e1, e2, e3)`.
pub fn three_bridge_problem(p: f64, lambda: f64) -> Result<NlsProblem> {
    let g = three_bridge();
    NlsProblem::with_coefficients(
        &g,
        p,
        lambda,
        Coefficient::constant(&g, 0.0),
        Coefficient::per_edge(&[0.0, 0.0, 1.0]),
    )
}

/// `u = a cos(kπx) + b_i sin(kπx)` on edge `e_i` of the three-bridge, at
/// `λ = -(kπ)²`, for `p = 4`. Only `a = 0`, `b3 = 0` give solutions of the
/// nonlinear problem, and `b1 + b2 + b3 = 0` is required by Kirchhoff.
pub fn build_three_bridge_eigenfunction(k: u32, coeffs: [f64; 4]) -> Result<BuiltExample> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let [a, b1, b2, b3] = coeffs;
    let scale = 1.0 + a.abs() + b1.abs() + b2.abs() + b3.abs();
    if (b1 + b2 + b3).abs() > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "coefficients must satisfy b1 + b2 + b3 = 0, got {}",
            b1 + b2 + b3
        )));
    }
    if a != 0.0 || b3 != 0.0 {
        return Err(Error::NoSolution(
            "with rho = 1 on e3 the function must vanish there: need a = 0 and b3 = 0".into(),
        ));
    }
    let g = three_bridge();
    let omega = k as f64 * std::f64::consts::PI;
    let prob = three_bridge_problem(4.0, -omega * omega)?;
    let bs = [b1, b2, b3];
    let h = SolveOptions::default().spacing(&g, prob.lambda);
    let grids: Vec<EdgeGrid> = g
        .edges()
        .iter()
        .map(|e| EdgeGrid::with_spacing(e.length, h))
        .collect::<Result<_>>()?;
    let (u, gap) = GridFunction::sample(&g, &grids, vec![None; 3], |e, x| {
        let b = bs[e.0];
        (
            a * (omega * x).cos() + b * (omega * x).sin(),
            omega * (-a * (omega * x).sin() + b * (omega * x).cos()),
        )
    })?;
    let unknowns = ShootingUnknowns {
        vertex_values: vec![a, a * omega.cos()],
        edges: bs.iter().map(|b| EdgeParam::Slope(omega * b)).collect(),
    };
    let candidate = SolutionCandidate::new(&g, u, prob, gap)?.with_unknowns(unknowns);
    Ok(BuiltExample {
        graph: g,
        candidate,
    })
}

/// The `loop_len`-periodic solution placed on the loop of a tadpole with a
/// root at the junction, and zero on the half-line. `W ≡ 0`, `ρ ≡ 1`.
pub fn build_tadpole_compact_support(p: f64, lambda: f64, loop_len: f64) -> Result<BuiltExample> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "compact-support tadpole needs lambda >= 0, got {lambda}"
        )));
    }
    let g = tadpole(loop_len, 1)?;
    let per = periodic_solution(p, lambda, loop_len)?;
    let prob = NlsProblem::standard(&g, p, lambda)?;
    let unknowns = ShootingUnknowns {
        vertex_values: vec![0.0],
        edges: vec![
            EdgeParam::Loop {
                tail: per.slope,
                head: -per.slope,
            },
            EdgeParam::Zero,
        ],
    };
    let candidate = candidate_from_unknowns(&g, &prob, &unknowns, SolveOptions::default())?;
    Ok(BuiltExample {
        graph: g,
        candidate,
    })
}

/// The soliton `φ_λ` on `star_graph(2)`, centred at the vertex.
pub fn build_line_soliton(p: f64, lambda: f64) -> Result<BuiltExample> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let g = star_graph(2)?;
    let prob = NlsProblem::standard(&g, p, lambda)?;
    let unknowns = ShootingUnknowns {
        vertex_values: vec![soliton_state(p, lambda, 0.0)?.u],
        edges: vec![EdgeParam::Soliton { shift: 0.0, sign: 1.0 }; 2],
    };
    let candidate = candidate_from_unknowns(&g, &prob, &unknowns, SolveOptions::default())?;
    Ok(BuiltExample {
        graph: g,
        candidate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourStarVariant {
    /// Peaks at distance `λ^{-1/2}` from the center.
    Near,
    /// Peaks at distance `1` from the center.
    Far,
}

/// Soliton pieces on the four-star: edge `e_i` carries `φ_λ(x + (-1)^i d)`
/// with `d = λ^{-1/2}` (near) or `d = 1` (far), so odd edges hold a peak.
pub fn build_four_star_family(p: f64, lambda: f64, variant: FourStarVariant) -> Result<BuiltExample> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let g = four_star();
    let prob = NlsProblem::standard(&g, p, lambda)?;
    let d = match variant {
        FourStarVariant::Near => 1.0 / lambda.sqrt(),
        FourStarVariant::Far => 1.0,
    };
    let center = soliton_state(p, lambda, d)?.u;
    let edges = (1..=4)
        .map(|i| EdgeParam::Soliton {
            shift: if i % 2 == 1 { -d } else { d },
            sign: 1.0,
        })
        .collect();
    let unknowns = ShootingUnknowns {
        vertex_values: vec![center],
        edges,
    };
    let candidate = candidate_from_unknowns(&g, &prob, &unknowns, SolveOptions::default())?;
    Ok(BuiltExample {
        graph: g,
        candidate,
    })
}

/// Tadpole with a loop of length 2, `W ≡ 0`, `ρ = 1` on the loop and `0` on
/// the half-line.
pub fn tadpole_problem(p: f64, lambda: f64) -> Result<(MetricGraph, NlsProblem)> {
    let g = tadpole(2.0, 1)?;
    let prob = NlsProblem::with_coefficients(
        &g,
        p,
        lambda,
        Coefficient::constant(&g, 0.0),
        Coefficient::per_edge(&[1.0, 0.0]),
    )?;
    Ok((g, prob))
}

/// `M_0`: the maximum of the 2-periodic solution at `λ = 0`, which is also its
/// value at the junction when the loop midpoint sits at a minimum.
pub fn tadpole_m0(p: f64) -> Result<f64> {
    Ok(periodic_solution(p, 0.0, 2.0)?.amplitude())
}

fn psi(p: f64, lambda: f64, m: f64) -> Result<OdeState> {
    let t = integrate(
        |_, u| lambda * u - u.abs().powf(p - 2.0) * u,
        0.0,
        OdeState::new(-m, 0.0),
        1.0,
        Tolerance::default(),
    )?;
    Ok(t.last())
}

/// Solve `F(M, λ) = 2ψ'(1) + √λ ψ(1) = 0`, where `ψ` solves the loop equation
/// from the midpoint with `ψ(0) = -M`, `ψ'(0) = 0`, by bisection on
/// `bracket`. Returns `M(λ)` and the solution `U_λ`, equal to `ψ` on the loop
/// and `ψ(1) e^{-√λ x}` on the half-line.
pub fn tadpole_continuation(p: f64, lambda: f64, bracket: (f64, f64)) -> Result<(f64, BuiltExample)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let f = |m: f64| {
        psi(p, lambda, m)
            .map(|s| 2.0 * s.du + lambda.sqrt() * s.u)
            .unwrap_or(f64::NAN)
    };
    let m = bisect(f, bracket.0, bracket.1, 1e-10)?;
    let end = psi(p, lambda, m)?;
    let (g, prob) = tadpole_problem(p, lambda)?;
    let unknowns = ShootingUnknowns {
        vertex_values: vec![end.u],
        edges: vec![
            EdgeParam::Loop {
                tail: -end.du,
                head: -end.du,
            },
            EdgeParam::Linear,
        ],
    };
    let candidate = candidate_from_unknowns(&g, &prob, &unknowns, SolveOptions::default())?;
    Ok((
        m,
        BuiltExample {
            graph: g,
            candidate,
        },
    ))
}

/// [`tadpole_continuation`] along an increasing grid of positive `λ`, starting
/// from a ±5% bracket around `M_0` and recentring on each root.
pub fn tadpole_branch(p: f64, lambdas: &[f64]) -> Result<Vec<(f64, f64, BuiltExample)>> {
    let mut center = tadpole_m0(p)?;
    let mut out = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let (m, ex) = tadpole_continuation(p, l, (0.95 * center, 1.05 * center))?;
        center = m;
        out.push((l, m, ex));
    }
    Ok(out)
}

/// `((W + λ) / ρ)^{1/(p-2)}` with zero slope, a starting guess for the
/// positive ground state on a compact graph with `ρ > 0` and `W + λ > 0`.
pub fn ground_state_guess(g: &MetricGraph, prob: &NlsProblem, opts: SolveOptions) -> Result<GridFunction> {
    if !g.is_compact() {
        return Err(Error::NonCompact);
    }
    let h = opts.spacing(g, prob.lambda);
    let grids: Vec<EdgeGrid> = g
        .edges()
        .iter()
        .map(|e| EdgeGrid::with_spacing(e.length, h))
        .collect::<Result<_>>()?;
    let mut bad = None;
    let (u, _) = GridFunction::sample(g, &grids, vec![None; g.edge_count()], |e, s| {
        let (w, rho) = (prob.w.eval(e, s), prob.rho.eval(e, s));
        if !(rho > 0.0 && w + prob.lambda > 0.0) {
            bad.get_or_insert((e, s));
            return (0.0, 0.0);
        }
        (((w + prob.lambda) / rho).powf(1.0 / (prob.p - 2.0)), 0.0)
    })?;
    if let Some((e, s)) = bad {
        return Err(Error::InvalidArgument(format!(
            "ground-state guess needs rho > 0 and W + lambda > 0 (fails on '{}' at s = {s})",
            g.edge(e).name
        )));
    }
    Ok(u)
}

/// `t φ₁` for `λ` just above `-λ₁` on a compact graph, where `φ₁` is the
/// positive ground state of `-v'' + W v` (computed at mesh size `h_fem`) and
/// `t^{p-2} = (λ + λ₁) ∫φ₁² / ∫ρ|φ₁|^p`.
pub fn bifurcation_guess(g: &MetricGraph, prob: &NlsProblem, h_fem: f64, opts: SolveOptions) -> Result<GridFunction> {
    if !g.is_compact() {
        return Err(Error::NonCompact);
    }
    let spec = eigenvalues(g, &prob.w, 1, h_fem)?;
    let gap = prob.lambda + spec.values[0];
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {} is not above the threshold -lambda_1 = {}",
            prob.lambda, -spec.values[0]
        )));
    }
    let nodes: Vec<Vec<(f64, f64)>> = g.edges().iter().map(|e| spec.edge_samples(0, e.id)).collect();
    let sign = if nodes.iter().flatten().map(|n| n.1).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let (mut l2, mut lp) = (0.0, 0.0);
    for (e, pts) in g.edges().iter().zip(&nodes) {
        for w in pts.windows(2) {
            let dx = w[1].0 - w[0].0;
            let mid = 0.5 * (w[0].0 + w[1].0);
            l2 += 0.5 * dx * (w[0].1 * w[0].1 + w[1].1 * w[1].1);
            lp += 0.5 * dx * prob.rho.eval(e.id, mid) * (w[0].1.abs().powf(prob.p) + w[1].1.abs().powf(prob.p));
        }
    }
    if !(lp > 0.0) {
        return Err(Error::InvalidArgument("rho vanishes on the support of the ground state".into()));
    }
    let t = sign * (gap * l2 / lp).powf(1.0 / (prob.p - 2.0));
    let h = opts.spacing(g, prob.lambda);
    let grids: Vec<EdgeGrid> = g
        .edges()
        .iter()
        .map(|e| EdgeGrid::with_spacing(e.length, h))
        .collect::<Result<_>>()?;
    let (u, _) = GridFunction::sample(g, &grids, vec![None; g.edge_count()], |e, s| {
        let pts = &nodes[e.0];
        let k = pts.partition_point(|n| n.0 <= s).clamp(1, pts.len() - 1);
        let (a, b) = (pts[k - 1], pts[k]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        (t * (a.1 + slope * (s - a.0)), t * slope)
    })?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeId, VertexId};
    use crate::nls::{count_nodal_zones, kirchhoff_residual};
    use crate::ode::soliton;

    #[test]
    fn three_bridge_phi_one() {
        let ex = build_three_bridge_eigenfunction(1, [0.0, 1.0, -1.0, 0.0]).unwrap();
        let c = &ex.candidate;
        assert!(c.report().passes(1e-10), "{:?}", c.report());
        assert!((c.lambda() + std::f64::consts::PI.powi(2)).abs() < 1e-12);
        for v in ex.graph.vertices() {
            assert!(kirchhoff_residual(&ex.graph, c.u(), v).unwrap() < 1e-12);
        }
        let nodal = count_nodal_zones(&ex.graph, c.u(), &c.prob().rho);
        assert_eq!((nodal.total, nodal.outside_g0), (2, 0));
    }

    #[test]
    fn three_bridge_phi_two_has_four_zones() {
        let ex = build_three_bridge_eigenfunction(2, [0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(count_nodal_zones(&ex.graph, ex.candidate.u(), &ex.candidate.prob().rho).total, 4);
    }

    #[test]
    fn three_bridge_rejects_bad_coefficients() {
        assert!(build_three_bridge_eigenfunction(1, [0.0, 1.0, 1.0, 0.0]).is_err());
        assert!(build_three_bridge_eigenfunction(1, [0.5, 1.0, -1.0, 0.0]).is_err());
        assert!(build_three_bridge_eigenfunction(1, [0.0, 1.0, -2.0, 1.0]).is_err());
    }

    #[test]
    fn tadpole_compact_support_zero_lambda() {
        let ex = build_tadpole_compact_support(4.0, 0.0, 2.0).unwrap();
        let c = &ex.candidate;
        assert!(c.report().passes(1e-8), "{:?}", c.report());
        assert!(c.u().l2_norm() > 0.0);
        assert!(c.u().edge(EdgeId(1)).u.iter().all(|&v| v == 0.0));
        assert_eq!(c.u().vertex_value(VertexId(0)), 0.0);
        let nodal = count_nodal_zones(&ex.graph, c.u(), &c.prob().rho);
        assert_eq!((nodal.total, nodal.outside_g0), (2, 2));
    }

    #[test]
    fn tadpole_compact_support_positive_lambda() {
        let ex = build_tadpole_compact_support(4.0, 1.0, 2.0).unwrap();
        assert!(ex.candidate.report().passes(1e-8), "{:?}", ex.candidate.report());
    }

    #[test]
    fn four_star_near_values() {
        let ex = build_four_star_family(4.0, 1.0, FourStarVariant::Near).unwrap();
        let c = &ex.candidate;
        assert!(c.report().passes(1e-7), "{:?}", c.report());
        let peak = c.u().eval(EdgeId(0), 1.0).0;
        assert!((peak - 2f64.sqrt()).abs() < 1e-6);
        assert!(kirchhoff_residual(&ex.graph, c.u(), VertexId(0)).unwrap() < 1e-7);
    }

    #[test]
    fn four_star_far_values() {
        let ex = build_four_star_family(4.0, 4.0, FourStarVariant::Far).unwrap();
        let c = &ex.candidate;
        let peak = c.u().eval(EdgeId(2), 1.0).0;
        assert!((peak - (4.0f64 * 4.0 / 2.0).sqrt()).abs() < 1e-6);
        assert!((c.u().eval(EdgeId(1), 0.5).0 - soliton(4.0, 4.0, 1.5).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn tadpole_branch_root_and_tail_mass() {
        let m0 = tadpole_m0(4.0).unwrap();
        let (m, ex) = tadpole_continuation(4.0, 1e-4, (0.9 * m0, 1.1 * m0)).unwrap();
        assert!((m - m0).abs() < 0.05 * m0);
        let c = &ex.candidate;
        assert!(c.report().passes(1e-8), "{:?}", c.report());
        let u1 = c.u().vertex_value(VertexId(0));
        let tail_mass = c.u().edge_integral_pow(EdgeId(1), 2.0).sqrt();
        let expected = u1.abs() / (2.0 * 1e-4f64.sqrt()).sqrt();
        assert!((tail_mass - expected).abs() < 1e-8 * expected);
    }
}
