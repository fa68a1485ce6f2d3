//! Global solutions on graphs: shooting, residuals, continuation, nodal zones
//! and the explicit example families.

mod continuation;
mod examples;
mod nodal;
mod residual;
mod shooting;
mod weak;

pub use continuation::{continuation_in_lambda, Branch, BranchPoint};
pub use examples::{
    build_four_star_family, build_line_soliton, build_tadpole_compact_support, build_three_bridge_eigenfunction,
    bifurcation_guess, ground_state_guess, tadpole_branch, tadpole_continuation, tadpole_m0, tadpole_problem, three_bridge_problem,
    BuiltExample, FourStarVariant,
};
pub use nodal::{count_nodal_zones, NodalCount};
pub use residual::{kirchhoff_residual, residual_report, ResidualReport};
pub use shooting::{
    solve_stationary, EdgeParam, Guess, HalfLineModel, ShootingUnknowns, SolveOptions,
    SolveOutcome,
};
pub use weak::{weak_residual, weak_residual_battery, TestFunction};

use crate::coeff::NlsProblem;
use crate::error::Result;
use crate::graph::MetricGraph;
use crate::grid::GridFunction;

/// A function on the graph together with the problem it is meant to solve and
/// its residuals. The report is always the one computed for the stored data.
#[derive(Debug, Clone)]
pub struct SolutionCandidate {
    u: GridFunction,
    prob: NlsProblem,
    report: ResidualReport,
    unknowns: Option<ShootingUnknowns>,
}

impl SolutionCandidate {
    /// Wrap `u`, computing its residual report. `continuity` is any continuity
    /// defect measured while gluing edges.
    pub fn new(g: &MetricGraph, u: GridFunction, prob: NlsProblem, continuity: f64) -> Result<Self> {
        let report = residual_report(g, &u, &prob, continuity)?;
        Ok(Self {
            u,
            prob,
            report,
            unknowns: None,
        })
    }

    pub(crate) fn with_unknowns(mut self, unknowns: ShootingUnknowns) -> Self {
        self.unknowns = Some(unknowns);
        self
    }

    pub fn u(&self) -> &GridFunction {
        &self.u
    }

    pub fn prob(&self) -> &NlsProblem {
        &self.prob
    }

    pub fn lambda(&self) -> f64 {
        self.prob.lambda
    }

    pub fn report(&self) -> &ResidualReport {
        &self.report
    }

    /// Shooting data the candidate was built from, if any.
    pub fn unknowns(&self) -> Option<&ShootingUnknowns> {
        self.unknowns.as_ref()
    }

    /// Replace the function and recompute the report.
    pub fn with_u(&self, g: &MetricGraph, u: GridFunction) -> Result<Self> {
        Self::new(g, u, self.prob.clone(), 0.0)
    }

    pub fn is_trivial(&self) -> bool {
        self.u.max_abs() < 1e-8
    }
}
