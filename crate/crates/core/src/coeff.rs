//! Edgewise coefficients `W`, `ρ` and the stationary problem they define.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph};

/// A coefficient restricted to one edge: a constant, or samples on the
/// uniform grid of `[0, span]` interpolated linearly and held constant past
/// `span`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeCoefficient {
    Const(f64),
    Samples { span: f64, values: Vec<f64> },
}

impl EdgeCoefficient {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Const(c) => *c,
            Self::Samples { span, values } => {
                let n = values.len();
                if n == 1 {
                    return values[0];
                }
                let h = span / (n - 1) as f64;
                let t = (s / h).clamp(0.0, (n - 1) as f64);
                let j = (t.floor() as usize).min(n - 2);
                let w = t - j as f64;
                (1.0 - w) * values[j] + w * values[j + 1]
            }
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Self::Const(c) => Some(*c),
            Self::Samples { values, .. } => {
                let first = *values.first()?;
                values.iter().all(|&v| v == first).then_some(first)
            }
        }
    }

    /// (min, max) of the coefficient; samples are interpolated linearly so the
    /// extremes sit at nodes.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::Const(c) => (*c, *c),
            Self::Samples { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn validate(&self, name: &str) -> Result<()> {
        match self {
            Self::Const(c) if !c.is_finite() => Err(Error::InvalidArgument(format!(
                "coefficient on '{name}' is not finite"
            ))),
            Self::Samples { span, values } => {
                if values.len() < 2 || !(*span > 0.0 && span.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "sampled coefficient on '{name}' needs >= 2 values and a positive span"
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient on '{name}' is not finite"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// One [`EdgeCoefficient`] per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient(pub Vec<EdgeCoefficient>);

impl Coefficient {
    pub fn constant(g: &MetricGraph, c: f64) -> Self {
        Self(vec![EdgeCoefficient::Const(c); g.edge_count()])
    }

    pub fn per_edge(values: &[f64]) -> Self {
        Self(values.iter().map(|&c| EdgeCoefficient::Const(c)).collect())
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeCoefficient {
        &self.0[e.0]
    }

    pub fn eval(&self, e: EdgeId, s: f64) -> f64 {
        self.0[e.0].eval(s)
    }

    pub fn sup_abs(&self) -> f64 {
        self.0
            .iter()
            .map(|c| {
                let (lo, hi) = c.range();
                lo.abs().max(hi.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.0.iter().all(EdgeCoefficient::is_zero)
    }

    pub fn validate(&self, g: &MetricGraph, what: &str) -> Result<()> {
        if self.0.len() != g.edge_count() {
            return Err(Error::InvalidArgument(format!(
                "{what} has {} entries for {} edges",
                self.0.len(),
                g.edge_count()
            )));
        }
        for (e, c) in g.edges().iter().zip(&self.0) {
            c.validate(&e.name)?;
            if let EdgeCoefficient::Samples { span, .. } = c {
                if e.is_bounded() && (span - e.length).abs() > 1e-12 * e.length {
                    return Err(Error::InvalidArgument(format!(
                        "{what} samples on '{}' span {span}, edge length is {}",
                        e.name, e.length
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Constants `(a, b, W̄)` with `|W| <= W̄`, `0 <= ρ <= b`, and on each edge
/// either `ρ >= a` or `ρ ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub a: f64,
    pub b: f64,
    pub w_bar: f64,
}

impl Bounds {
    /// Tightest bounds compatible with the given coefficients.
    pub fn infer(w: &Coefficient, rho: &Coefficient) -> Self {
        let b = rho
            .0
            .iter()
            .map(|c| c.range().1)
            .fold(0.0, f64::max);
        let a = rho
            .0
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.range().0)
            .fold(f64::INFINITY, f64::min);
        let b = if b > 0.0 { b } else { 1.0 };
        let a = if a.is_finite() { a.max(0.0) } else { 0.0 };
        Self {
            a,
            b,
            w_bar: w.sup_abs(),
        }
    }
}

/// The stationary problem `-u'' + (W + λ) u = ρ |u|^{p-2} u`.
#[derive(Debug, Clone, PartialEq)]
pub struct NlsProblem {
    pub p: f64,
    pub lambda: f64,
    pub w: Coefficient,
    pub rho: Coefficient,
    pub bounds: Bounds,
}

impl NlsProblem {
    pub fn new(
        g: &MetricGraph,
        p: f64,
        lambda: f64,
        w: Coefficient,
        rho: Coefficient,
        bounds: Bounds,
    ) -> Result<Self> {
        if !(p > 2.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("p must exceed 2, got {p}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite".into()));
        }
        w.validate(g, "W")?;
        rho.validate(g, "rho")?;
        let Bounds { a, b, w_bar } = bounds;
        if !(a >= 0.0 && b > 0.0 && a <= b && w_bar >= 0.0) {
            return Err(Error::Hypothesis(format!(
                "need 0 <= a <= b, b > 0, W̄ >= 0; got a = {a}, b = {b}, W̄ = {w_bar}"
            )));
        }
        for (e, (wc, rc)) in g.edges().iter().zip(w.0.iter().zip(&rho.0)) {
            let (wlo, whi) = wc.range();
            if wlo.abs().max(whi.abs()) > w_bar * (1.0 + 1e-12) {
                return Err(Error::Hypothesis(format!(
                    "|W| exceeds W̄ = {w_bar} on edge '{}'",
                    e.name
                )));
            }
            let (rlo, rhi) = rc.range();
            if rlo < 0.0 || rhi > b * (1.0 + 1e-12) {
                return Err(Error::Hypothesis(format!(
                    "rho leaves [0, {b}] on edge '{}'",
                    e.name
                )));
            }
            if !rc.is_zero() && rlo < a * (1.0 - 1e-12) {
                return Err(Error::Hypothesis(format!(
                    "rho on edge '{}' is neither >= a = {a} nor identically zero",
                    e.name
                )));
            }
        }
        Ok(Self {
            p,
            lambda,
            w,
            rho,
            bounds,
        })
    }

    /// Problem with inferred bounds.
    pub fn with_coefficients(
        g: &MetricGraph,
        p: f64,
        lambda: f64,
        w: Coefficient,
        rho: Coefficient,
    ) -> Result<Self> {
        let bounds = Bounds::infer(&w, &rho);
        Self::new(g, p, lambda, w, rho, bounds)
    }

    /// `W ≡ 0`, `ρ ≡ 1`.
    pub fn standard(g: &MetricGraph, p: f64, lambda: f64) -> Result<Self> {
        Self::with_coefficients(
            g,
            p,
            lambda,
            Coefficient::constant(g, 0.0),
            Coefficient::constant(g, 1.0),
        )
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Right-hand side `u''` of the edge equation.
    pub fn second_derivative(&self, e: EdgeId, s: f64, u: f64) -> f64 {
        let w = self.w.eval(e, s) + self.lambda;
        let r = self.rho.eval(e, s);
        w * u - r * u.abs().powf(self.p - 2.0) * u
    }

    /// Restriction to a single edge.
    pub fn on_edge(&self, e: EdgeId) -> EdgeProblem<'_> {
        EdgeProblem {
            p: self.p,
            lambda: self.lambda,
            w: self.w.edge(e),
            rho: self.rho.edge(e),
        }
    }
}

/// The problem restricted to one edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeProblem<'a> {
    pub p: f64,
    pub lambda: f64,
    pub w: &'a EdgeCoefficient,
    pub rho: &'a EdgeCoefficient,
}

impl EdgeProblem<'_> {
    pub fn accel(&self, s: f64, u: f64) -> f64 {
        let w = self.w.eval(s) + self.lambda;
        let r = self.rho.eval(s);
        if r == 0.0 {
            w * u
        } else {
            w * u - r * u.abs().powf(self.p - 2.0) * u
        }
    }
}
