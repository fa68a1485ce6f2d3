//! `L²` masses along solution branches and their log-log slopes.

use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::NlsProblem;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::morse::{default_morse_h, morse_index};
use crate::nls::{continuation_in_lambda, SolutionCandidate, SolveOptions};
use crate::util::weighted_line_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Compact graph.
    Compact,
    /// Nonlinearity supported on the compact core.
    Localized,
    /// Nonlinearity on the whole graph, half-lines included.
    Nls,
}

impl Scenario {
    /// Expected exponent of `‖u‖_{L²}` in `λ` as `λ → 0` (localized) or
    /// `λ → ∞` (nls).
    pub fn predicted_exponent(self, p: f64) -> Option<f64> {
        match self {
            Self::Compact => None,
            Self::Localized => Some(-0.25),
            Self::Nls => Some((6.0 - p) / (4.0 * (p - 2.0))),
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(Self::Compact),
            "localized" => Ok(Self::Localized),
            "nls" => Ok(Self::Nls),
            _ => Err(Error::InvalidArgument(format!(
                "unknown scenario '{s}' (compact, localized, nls)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BranchSeed {
    /// Continue `seed` over the grid.
    Continue {
        seed: SolutionCandidate,
        prob: NlsProblem,
        opts: SolveOptions,
    },
    /// Solutions computed elsewhere.
    Points(Vec<(f64, SolutionCandidate)>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassRow {
    pub branch: usize,
    pub lambda: f64,
    pub mass: Option<f64>,
    pub morse_index: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCurve {
    pub scenario: Scenario,
    pub rows: Vec<MassRow>,
    /// Largest mass per `λ` among rows with Morse index `<= m*` (or all rows
    /// when no bound is given). A lower envelope of `q_{m*}`.
    pub envelope: Vec<(f64, f64)>,
    /// Slope of `log mass` against `log λ` over the first and last five
    /// envelope points.
    pub slope_low: Option<f64>,
    pub slope_high: Option<f64>,
    pub predicted: Option<f64>,
}

fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    weighted_line_fit(&x, &y, &vec![1.0; x.len()]).map(|f| f.0)
}

/// Masses along every branch; with `morse`, each converged point also gets
/// its Morse index at the default mesh.
pub fn mass_curve(
    scenario: Scenario,
    g: &MetricGraph,
    p: f64,
    m_star: Option<usize>,
    lambdas: &[f64],
    seeds: Vec<BranchSeed>,
    morse: bool,
) -> Result<MassCurve> {
    if seeds.is_empty() {
        return Err(Error::Empty("branch seeds"));
    }
    let mut points: Vec<(usize, f64, std::result::Result<SolutionCandidate, String>)> = Vec::new();
    for (b, seed) in seeds.into_iter().enumerate() {
        match seed {
            BranchSeed::Continue { seed, prob, opts } => {
                let branch = continuation_in_lambda(g, &prob, &seed, lambdas, opts)?;
                points.extend(branch.points.into_iter().map(|pt| (b, pt.lambda, pt.result)));
            }
            BranchSeed::Points(list) => points.extend(list.into_iter().map(|(l, c)| (b, l, Ok(c)))),
        }
    }
    let rows: Vec<MassRow> = points
        .into_par_iter()
        .map(|(branch, lambda, result)| match result {
            Ok(c) => {
                let (morse_index, error) = if morse {
                    match morse_index(g, &c, default_morse_h(g, lambda), None) {
                        Ok(r) => (Some(r.index), None),
                        Err(e) => (None, Some(e.to_string())),
                    }
                } else {
                    (None, None)
                };
                MassRow {
                    branch,
                    lambda,
                    mass: Some(c.u().l2_norm()),
                    morse_index,
                    error,
                }
            }
            Err(e) => MassRow {
                branch,
                lambda,
                mass: None,
                morse_index: None,
                error: Some(e),
            },
        })
        .collect();

    let mut envelope: Vec<(f64, f64)> = Vec::new();
    let mut sorted: Vec<&MassRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for r in sorted {
        let Some(m) = r.mass else { continue };
        if let (Some(bound), true) = (m_star, morse) {
            if r.morse_index.is_none_or(|i| i > bound) {
                continue;
            }
        }
        match envelope.last_mut() {
            Some(last) if (last.0 - r.lambda).abs() <= 1e-12 * r.lambda.abs() => last.1 = last.1.max(m),
            _ => envelope.push((r.lambda, m)),
        }
    }
    let k = envelope.len().min(5);
    let positive = envelope.iter().all(|(l, m)| *l > 0.0 && *m > 0.0);
    let (slope_low, slope_high) = if positive {
        (log_slope(&envelope[..k]), log_slope(&envelope[envelope.len() - k..]))
    } else {
        (None, None)
    };
    Ok(MassCurve {
        scenario,
        rows,
        envelope,
        slope_low,
        slope_high,
        predicted: scenario.predicted_exponent(p),
    })
}
