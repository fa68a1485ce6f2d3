//! Exponential decay of `|u|` away from its concentration points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DistanceField, GraphPoint, MetricGraph};
use crate::nls::SolutionCandidate;
use crate::util::weighted_line_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFitReport {
    /// Fitted slope of `log |u|` against the distance `d` to the centers.
    pub slope: f64,
    pub intercept: f64,
    /// `√λ / 2`.
    pub bound_rate: f64,
    /// `max |u| e^{√λ d / 2} / λ^{1/(p-2)}` over all samples.
    pub constant: f64,
    /// Distance range of the fit window.
    pub window: (f64, f64),
    pub samples: usize,
    /// Weighted rms residual of the fit.
    pub residual: f64,
    pub tolerance: f64,
    pub passes: bool,
}

/// Weighted (by `|u|`) least-squares fit of `log |u|` against `d(x)` over the
/// grid samples with `d >= 5 λ^{-1/2}` and `|u|` above the noise floor
/// `1e2 · ε · ‖u‖_∞`.
pub fn decay_fit(g: &MetricGraph, c: &SolutionCandidate, centers: &[GraphPoint]) -> Result<DecayFitReport> {
    if centers.is_empty() {
        return Err(Error::Empty("center set"));
    }
    let lambda = c.lambda();
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("decay fit needs lambda > 0, got {lambda}")));
    }
    let p = c.prob().p;
    let k = lambda.sqrt();
    let u = c.u();
    let floor = 1e2 * f64::EPSILON * u.max_abs();
    let d_min = 5.0 / k;
    let field = DistanceField::new(g, centers);
    let unit = lambda.powf(1.0 / (p - 2.0));

    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    let mut constant: f64 = 0.0;
    for e in g.edges() {
        let s = u.edge(e.id);
        for (j, v) in s.u.iter().enumerate() {
            let d = field.on_edge(g, e.id, s.grid.x(j));
            let a = v.abs();
            constant = constant.max(a * (0.5 * k * d).exp() / unit);
            if d >= d_min && a > floor {
                xs.push(d);
                ys.push(a.ln());
                ws.push(a);
            }
        }
    }
    if xs.len() < 10 {
        return Err(Error::InsufficientSamples(format!(
            "{} samples with d >= {d_min} above the noise floor",
            xs.len()
        )));
    }
    let (slope, intercept, residual) = weighted_line_fit(&xs, &ys, &ws)
        .ok_or_else(|| Error::InsufficientSamples("degenerate decay window".into()))?;
    let window = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let tolerance = 1e-2 * k;
    let bound_rate = 0.5 * k;
    Ok(DecayFitReport {
        slope,
        intercept,
        bound_rate,
        constant,
        window,
        samples: xs.len(),
        residual,
        tolerance,
        passes: slope <= -bound_rate + tolerance && constant.is_finite(),
    })
}
