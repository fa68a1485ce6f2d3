use super::shooting::unknowns_from_grid;
use super::{solve_stationary, Guess, ShootingUnknowns, SolutionCandidate, SolveOptions};
use crate::coeff::NlsProblem;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    /// The converged solution, or why the step failed.
    pub result: std::result::Result<SolutionCandidate, String>,
    pub iterations: usize,
}

/// Solutions along a grid of `λ` values. Failed steps are kept.
#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
}

impl Branch {
    pub fn converged(&self) -> impl Iterator<Item = (f64, &SolutionCandidate)> {
        self.points
            .iter()
            .filter_map(|pt| pt.result.as_ref().ok().map(|c| (pt.lambda, c)))
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|pt| pt.result.is_err()).count()
    }
}

fn scale_covariant(g: &MetricGraph, prob: &NlsProblem) -> bool {
    g.bounded_edges().next().is_none()
        && prob.w.is_identically_zero()
        && prob.rho.0.iter().all(|c| c.as_const() == Some(1.0))
}

/// Continue `seed` along `lambdas`. The predictor is the exact rescaling on
/// scale-covariant graphs, a secant through the last two solutions when they
/// exist, and the last solution otherwise.
pub fn continuation_in_lambda(
    g: &MetricGraph,
    prob: &NlsProblem,
    seed: &SolutionCandidate,
    lambdas: &[f64],
    opts: SolveOptions,
) -> Result<Branch> {
    if lambdas.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("lambda grid must be finite".into()));
    }
    let seed_unknowns = match seed.unknowns() {
        Some(u) => u.clone(),
        None => unknowns_from_grid(g, seed.prob(), seed.u())?,
    };
    let covariant = scale_covariant(g, prob);
    let mut history: Vec<(f64, ShootingUnknowns)> = vec![(seed.lambda(), seed_unknowns)];
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let (l1, x1) = history.last().expect("seeded");
        let predictor = if covariant && *l1 > 0.0 && lambda > 0.0 {
            x1.rescaled(prob.p, *l1, lambda)
        } else if history.len() >= 2 {
            let (l0, x0) = &history[history.len() - 2];
            if (l1 - l0).abs() > 0.0 {
                let t = (lambda - l1) / (l1 - l0);
                let (a, b) = (x0.pack(), x1.pack());
                let x: Vec<f64> = a.iter().zip(&b).map(|(a, b)| b + t * (b - a)).collect();
                x1.unpack(&x)
            } else {
                x1.clone()
            }
        } else {
            x1.clone()
        };
        let step = solve_stationary(g, &prob.with_lambda(lambda), Guess::Unknowns(predictor), opts);
        match step {
            Ok(out) if out.converged && !out.trivial => {
                history.push((lambda, out.unknowns));
                points.push(BranchPoint {
                    lambda,
                    result: Ok(out.candidate),
                    iterations: out.iterations,
                });
            }
            Ok(out) => points.push(BranchPoint {
                lambda,
                result: Err(if out.trivial {
                    "collapsed to the zero solution".into()
                } else {
                    format!("residual {:.3e} above tolerance", out.candidate.report().max())
                }),
                iterations: out.iterations,
            }),
            Err(e) => points.push(BranchPoint {
                lambda,
                result: Err(e.to_string()),
                iterations: 0,
            }),
        }
    }
    let branch = Branch { points };
    if branch.converged().next().is_none() {
        return Err(Error::ContinuationFailed);
    }
    Ok(branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{star_graph, EdgeId};
    use crate::nls::EdgeParam;
    use crate::ode::soliton;

    #[test]
    fn line_soliton_branch_matches_closed_form() {
        let g = star_graph(2).unwrap();
        let prob = NlsProblem::standard(&g, 4.0, 1.0).unwrap();
        let start = ShootingUnknowns {
            vertex_values: vec![1.3],
            edges: vec![
                EdgeParam::Soliton { shift: 0.2, sign: 1.0 },
                EdgeParam::Soliton { shift: 0.1, sign: 1.0 },
            ],
        };
        let out = solve_stationary(&g, &prob, Guess::Unknowns(start), SolveOptions::default()).unwrap();
        assert!(out.converged, "{:?}", out.candidate.report());
        let lambdas: Vec<f64> = (1..=8).map(|k| 10f64.powf(k as f64 * 0.5)).collect();
        let branch =
            continuation_in_lambda(&g, &prob, &out.candidate, &lambdas, SolveOptions::default()).unwrap();
        assert_eq!(branch.failures(), 0);
        for (l, c) in branch.converged() {
            let peak = c.u().vertex_value(crate::graph::VertexId(0));
            let s0 = match c.unknowns().unwrap().edges[0] {
                EdgeParam::Soliton { shift, .. } => shift,
                _ => unreachable!(),
            };
            let mut err: f64 = 0.0;
            for k in 0..200 {
                let s = k as f64 * 0.05 / l.sqrt();
                let exact = soliton(4.0, l, s + s0).unwrap();
                err = err.max((c.u().eval(EdgeId(0), s).0 - exact).abs());
            }
            assert!(err <= 1e-6 * peak, "lambda {l}: {err}");
            let s1 = match c.unknowns().unwrap().edges[1] {
                EdgeParam::Soliton { shift, .. } => shift,
                _ => unreachable!(),
            };
            assert!((s0 + s1).abs() * l.sqrt() < 1e-6, "{s0} {s1}");
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let g = star_graph(2).unwrap();
        let prob = NlsProblem::standard(&g, 4.0, 1.0).unwrap();
        let start = ShootingUnknowns {
            vertex_values: vec![2f64.sqrt()],
            edges: vec![EdgeParam::Soliton { shift: 0.0, sign: 1.0 }; 2],
        };
        let c = super::super::shooting::candidate_from_unknowns(&g, &prob, &start, SolveOptions::default())
            .unwrap();
        assert!(continuation_in_lambda(&g, &prob, &c, &[], SolveOptions::default()).is_err());
    }
}
