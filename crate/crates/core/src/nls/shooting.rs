//! Newton shooting for the stationary problem on a graph.
//!
//! Unknowns are the vertex values plus, per edge, the data needed to start an
//! integration away from the tail vertex. Every bounded edge is integrated
//! tail to head and its head value must match the head vertex; loops are
//! integrated from both ends to their midpoint. Half-lines use an exact
//! decaying solution when one is known, otherwise a backward integration from
//! a truncation point with the decaying linear asymptote.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SolutionCandidate;
use crate::coeff::NlsProblem;
use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph};
use crate::grid::{EdgeGrid, EdgeSamples, GridFunction, Tail};
use crate::ode::{integrate, soliton_peak, soliton_state, OdeState, Tolerance, Trajectory};

/// How a half-line is represented in the shooting problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfLineModel {
    /// `ρ ≡ 0`, constant `W`: `u = u(0) e^{-κ s}` with `κ = √(W + λ)`.
    Linear,
    /// `W ≡ 0`, `ρ ≡ 1`, `λ > 0`: a translated soliton.
    Soliton,
    /// Integrated backward from a truncation point.
    Shooting,
    /// Identically zero.
    Zero,
}

/// Per-edge shooting data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeParam {
    /// Bounded edge between distinct vertices: `u'(0)`.
    Slope(f64),
    /// Loop: derivatives pointing away from the vertex at `s = 0` and at `s = ℓ`.
    Loop { tail: f64, head: f64 },
    Linear,
    /// `u(s) = sign * φ_λ(s + shift)`.
    Soliton { shift: f64, sign: f64 },
    /// `u(R) = amp * e^{-κR}`, `u'(R) = -κ u(R)` at the truncation point `R`.
    Shooting { amp: f64 },
    Zero,
}

impl EdgeParam {
    pub fn model(&self) -> Option<HalfLineModel> {
        match self {
            Self::Linear => Some(HalfLineModel::Linear),
            Self::Soliton { .. } => Some(HalfLineModel::Soliton),
            Self::Shooting { .. } => Some(HalfLineModel::Shooting),
            Self::Zero => Some(HalfLineModel::Zero),
            _ => None,
        }
    }
}

/// Vertex values and per-edge shooting data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingUnknowns {
    pub vertex_values: Vec<f64>,
    pub edges: Vec<EdgeParam>,
}

impl ShootingUnknowns {
    pub(crate) fn pack(&self) -> Vec<f64> {
        let mut x = self.vertex_values.clone();
        for p in &self.edges {
            match *p {
                EdgeParam::Slope(s) => x.push(s),
                EdgeParam::Loop { tail, head } => {
                    x.push(tail);
                    x.push(head);
                }
                EdgeParam::Soliton { shift, .. } => x.push(shift),
                EdgeParam::Shooting { amp } => x.push(amp),
                EdgeParam::Linear | EdgeParam::Zero => {}
            }
        }
        x
    }

    pub(crate) fn unpack(&self, x: &[f64]) -> Self {
        let nv = self.vertex_values.len();
        let mut k = nv;
        let mut next = || {
            k += 1;
            x[k - 1]
        };
        let edges = self
            .edges
            .iter()
            .map(|p| match *p {
                EdgeParam::Slope(_) => EdgeParam::Slope(next()),
                EdgeParam::Loop { .. } => {
                    let tail = next();
                    EdgeParam::Loop { tail, head: next() }
                }
                EdgeParam::Soliton { sign, .. } => EdgeParam::Soliton { shift: next(), sign },
                EdgeParam::Shooting { .. } => EdgeParam::Shooting { amp: next() },
                other => other,
            })
            .collect();
        Self {
            vertex_values: x[..nv].to_vec(),
            edges,
        }
    }

    /// Transport to another `λ` by the scaling `u ↦ μ^{1/(p-2)} u(√μ ·)` with
    /// `μ = λ_new/λ_old`. Exact on graphs without bounded edges when
    /// `W ≡ 0`.
    pub fn rescaled(&self, p: f64, lambda_old: f64, lambda_new: f64) -> Self {
        let mu = lambda_new / lambda_old;
        let amp = mu.powf(1.0 / (p - 2.0));
        let stretch = mu.sqrt();
        Self {
            vertex_values: self.vertex_values.iter().map(|v| v * amp).collect(),
            edges: self
                .edges
                .iter()
                .map(|p| match *p {
                    EdgeParam::Slope(s) => EdgeParam::Slope(s * amp * stretch),
                    EdgeParam::Loop { tail, head } => EdgeParam::Loop {
                        tail: tail * amp * stretch,
                        head: head * amp * stretch,
                    },
                    EdgeParam::Soliton { shift, sign } => EdgeParam::Soliton {
                        shift: shift / stretch,
                        sign,
                    },
                    EdgeParam::Shooting { amp: a } => EdgeParam::Shooting { amp: a * amp },
                    other => other,
                })
                .collect(),
        }
    }
}

/// Starting point for [`solve_stationary`].
#[derive(Debug, Clone)]
pub enum Guess {
    Unknowns(ShootingUnknowns),
    Grid(GridFunction),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Acceptance threshold on every residual report entry.
    pub tol: f64,
    pub max_iter: usize,
    pub ode_tol: Tolerance,
    /// Output spacing on bounded edges; derived from `λ` and the graph when
    /// `None`.
    pub h: Option<f64>,
    /// Cells on every sampled half-line.
    pub half_line_cells: usize,
    /// Truncation length of half-lines in units of the decay length `1/κ`.
    pub decay_lengths: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50,
            ode_tol: Tolerance::default(),
            h: None,
            half_line_cells: 1600,
            decay_lengths: 40.0,
        }
    }
}

impl SolveOptions {
    pub(crate) fn spacing(&self, g: &MetricGraph, lambda: f64) -> f64 {
        if let Some(h) = self.h {
            return h;
        }
        let lmin = g.min_bounded_length().unwrap_or(1.0);
        (lmin / 200.0).min(0.01 / lambda.abs().sqrt().max(1.0))
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub candidate: SolutionCandidate,
    pub unknowns: ShootingUnknowns,
    /// Report within `tol`.
    pub converged: bool,
    /// Converged to (numerically) zero.
    pub trivial: bool,
    pub iterations: usize,
}

fn decay_rate(prob: &NlsProblem, e: &Edge) -> Result<f64> {
    let far = prob.w.eval(e.id, f64::MAX) + prob.lambda;
    if far > 0.0 {
        Ok(far.sqrt())
    } else {
        Err(Error::NoSolution(format!(
            "half-line '{}' has no decaying linear solution (W + λ = {far} at infinity)",
            e.name
        )))
    }
}

/// Inverse of the soliton profile: `shift >= 0` with `φ_λ(shift) = value`.
fn soliton_shift(p: f64, lambda: f64, value: f64) -> f64 {
    let peak = soliton_peak(p, lambda);
    if value >= peak {
        return 0.0;
    }
    let base = (p / 2.0).powf(1.0 / (p - 2.0)) * lambda.powf(1.0 / (p - 2.0));
    let sech = (value / base).powf((p - 2.0) / 2.0);
    let z = (1.0 / sech).acosh();
    2.0 * z / (p - 2.0) / lambda.sqrt()
}

fn infer_model(prob: &NlsProblem, e: &Edge, u: &GridFunction) -> Result<EdgeParam> {
    let samples = u.edge(e.id);
    let u0 = u.vertex_value(e.tail);
    let du0 = samples.du[0];
    let scale = u.max_abs().max(1e-300);
    let zero_here = samples.u.iter().all(|v| v.abs() <= 1e-12 * scale.max(1.0));
    let w = prob.w.edge(e.id).as_const();
    let rho = prob.rho.edge(e.id).as_const();
    if zero_here && u0 == 0.0 {
        return Ok(EdgeParam::Zero);
    }
    if rho == Some(0.0) && w.is_some_and(|w| w + prob.lambda > 0.0) {
        return Ok(EdgeParam::Linear);
    }
    if rho == Some(1.0) && w == Some(0.0) && prob.lambda > 0.0 {
        if u0 == 0.0 {
            return Ok(EdgeParam::Zero);
        }
        let sign = u0.signum();
        let c = soliton_shift(prob.p, prob.lambda, u0.abs());
        let shift = if sign * du0 > 0.0 { -c } else { c };
        return Ok(EdgeParam::Soliton { shift, sign });
    }
    decay_rate(prob, e)?;
    Ok(EdgeParam::Shooting { amp: u0 })
}

/// Shooting data read off a sampled function.
pub(crate) fn unknowns_from_grid(
    g: &MetricGraph,
    prob: &NlsProblem,
    u: &GridFunction,
) -> Result<ShootingUnknowns> {
    let vertex_values = g.vertices().map(|v| u.vertex_value(v)).collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| {
            let s = u.edge(e.id);
            if e.is_loop() {
                Ok(EdgeParam::Loop {
                    tail: s.du[0],
                    head: -s.du[s.grid.n - 1],
                })
            } else if e.is_bounded() {
                Ok(EdgeParam::Slope(s.du[0]))
            } else {
                infer_model(prob, e, u)
            }
        })
        .collect::<Result<_>>()?;
    Ok(ShootingUnknowns {
        vertex_values,
        edges,
    })
}

/// Everything produced by one evaluation of the shooting map.
struct Evaluation {
    residual: Vec<f64>,
    /// Per edge: forward trajectory (and backward one for loops / shooting
    /// half-lines).
    trajectories: Vec<(Option<Trajectory>, Option<Trajectory>)>,
    loop_gap: f64,
}

struct Shooter<'a> {
    g: &'a MetricGraph,
    prob: &'a NlsProblem,
    opts: SolveOptions,
}

impl Shooter<'_> {
    fn truncation(&self, e: &Edge, param: &EdgeParam) -> Result<f64> {
        let n = self.opts.decay_lengths;
        Ok(match *param {
            EdgeParam::Linear | EdgeParam::Shooting { .. } => n / decay_rate(self.prob, e)?,
            EdgeParam::Soliton { shift, .. } => n / self.prob.lambda.sqrt() + (-shift).max(0.0),
            EdgeParam::Zero => 1.0,
            _ => unreachable!("bounded edge has no truncation"),
        })
    }

    fn evaluate(&self, x: &ShootingUnknowns, keep: bool) -> Result<Evaluation> {
        let g = self.g;
        let tol = self.opts.ode_tol;
        let mut outgoing = vec![0.0; g.vertex_count()];
        let mut residual = Vec::new();
        let mut trajectories = Vec::new();
        let mut loop_gap: f64 = 0.0;
        for (e, param) in g.edges().iter().zip(&x.edges) {
            let ep = self.prob.on_edge(e.id);
            let accel = |s: f64, v: f64| ep.accel(s, v);
            let ut = x.vertex_values[e.tail.0];
            let mut kept = (None, None);
            match *param {
                EdgeParam::Slope(sigma) => {
                    let head = e.head.expect("bounded");
                    let t = integrate(accel, 0.0, OdeState::new(ut, sigma), e.length, tol)?;
                    let end = t.last();
                    residual.push(end.u - x.vertex_values[head.0]);
                    outgoing[e.tail.0] += sigma;
                    outgoing[head.0] -= end.du;
                    if keep {
                        kept.0 = Some(t);
                    }
                }
                EdgeParam::Loop { tail, head } => {
                    let mid = 0.5 * e.length;
                    let f = integrate(accel, 0.0, OdeState::new(ut, tail), mid, tol)?;
                    let b = integrate(accel, e.length, OdeState::new(ut, -head), mid, tol)?;
                    let (fe, be) = (f.last(), b.last());
                    residual.push(fe.u - be.u);
                    residual.push(fe.du - be.du);
                    loop_gap = loop_gap.max((fe.u - be.u).abs());
                    outgoing[e.tail.0] += tail + head;
                    if keep {
                        kept = (Some(f), Some(b));
                    }
                }
                EdgeParam::Linear => {
                    let kappa = decay_rate(self.prob, e)?;
                    outgoing[e.tail.0] -= kappa * ut;
                }
                EdgeParam::Soliton { shift, sign } => {
                    let st = soliton_state(self.prob.p, self.prob.lambda, shift)?;
                    residual.push(sign * st.u - ut);
                    outgoing[e.tail.0] += sign * st.du;
                }
                EdgeParam::Shooting { amp } => {
                    let kappa = decay_rate(self.prob, e)?;
                    let r = self.truncation(e, param)?;
                    let ur = amp * (-kappa * r).exp();
                    let t = integrate(accel, r, OdeState::new(ur, -kappa * ur), 0.0, tol)?;
                    let start = t.last();
                    residual.push(start.u - ut);
                    outgoing[e.tail.0] += start.du;
                    if keep {
                        kept.1 = Some(t);
                    }
                }
                EdgeParam::Zero => {
                    residual.push(ut);
                }
            }
            trajectories.push(kept);
        }
        residual.extend(outgoing);
        Ok(Evaluation {
            residual,
            trajectories,
            loop_gap,
        })
    }

    fn build(&self, x: &ShootingUnknowns) -> Result<SolutionCandidate> {
        let g = self.g;
        let ev = self.evaluate(x, true)?;
        let h = self.opts.spacing(g, self.prob.lambda);
        let mut edges = Vec::with_capacity(g.edge_count());
        let mut tails = Vec::with_capacity(g.edge_count());
        for (e, (param, (fwd, bwd))) in g.edges().iter().zip(x.edges.iter().zip(&ev.trajectories)) {
            let ut = x.vertex_values[e.tail.0];
            let (samples, tail) = match *param {
                EdgeParam::Slope(_) => {
                    let t = fwd.as_ref().expect("kept");
                    let grid = EdgeGrid::with_spacing(e.length, h)?;
                    (EdgeSamples::from_fn(grid, |s| {
                        let st = t.eval(s);
                        (st.u, st.du)
                    }), None)
                }
                EdgeParam::Loop { .. } => {
                    let (f, b) = (fwd.as_ref().expect("kept"), bwd.as_ref().expect("kept"));
                    let grid = EdgeGrid::with_spacing(e.length, h)?;
                    let mid = 0.5 * e.length;
                    (EdgeSamples::from_fn(grid, |s| {
                        let st = if s <= mid { f.eval(s) } else { b.eval(s) };
                        (st.u, st.du)
                    }), None)
                }
                EdgeParam::Linear => {
                    let kappa = decay_rate(self.prob, e)?;
                    let r = self.truncation(e, param)?;
                    let grid = EdgeGrid::new(r, self.opts.half_line_cells + 1)?;
                    let samples = EdgeSamples::from_fn(grid, |s| {
                        let v = ut * (-kappa * s).exp();
                        (v, -kappa * v)
                    });
                    let amp = ut * (-kappa * r).exp();
                    (samples, Some(Tail { amplitude: amp, rate: kappa }))
                }
                EdgeParam::Soliton { shift, sign } => {
                    let (p, l) = (self.prob.p, self.prob.lambda);
                    let r = self.truncation(e, param)?;
                    let grid = EdgeGrid::new(r, self.opts.half_line_cells + 1)?;
                    let mut bad = None;
                    let samples = EdgeSamples::from_fn(grid, |s| match soliton_state(p, l, s + shift) {
                        Ok(st) => (sign * st.u, sign * st.du),
                        Err(err) => {
                            bad = Some(err);
                            (0.0, 0.0)
                        }
                    });
                    if let Some(err) = bad {
                        return Err(err);
                    }
                    let amp = samples.u[grid.n - 1];
                    (samples, Some(Tail { amplitude: amp, rate: l.sqrt() }))
                }
                EdgeParam::Shooting { amp } => {
                    let kappa = decay_rate(self.prob, e)?;
                    let t = bwd.as_ref().expect("kept");
                    let r = self.truncation(e, param)?;
                    let grid = EdgeGrid::new(r, self.opts.half_line_cells + 1)?;
                    let samples = EdgeSamples::from_fn(grid, |s| {
                        let st = t.eval(s);
                        (st.u, st.du)
                    });
                    let a = amp * (-kappa * r).exp();
                    (samples, Some(Tail { amplitude: a, rate: kappa }))
                }
                EdgeParam::Zero => {
                    let grid = EdgeGrid::new(1.0, 2)?;
                    (EdgeSamples::from_fn(grid, |_| (0.0, 0.0)), None)
                }
            };
            edges.push(samples);
            tails.push(tail);
        }
        let (u, gap) = GridFunction::assemble(g, edges, tails)?;
        let cand = SolutionCandidate::new(g, u, self.prob.clone(), gap.max(ev.loop_gap))?;
        Ok(cand.with_unknowns(x.clone()))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton iteration on the shooting map with a finite-difference Jacobian and
/// an SVD least-squares step, damped by halving up to eight times.
pub fn solve_stationary(
    g: &MetricGraph,
    prob: &NlsProblem,
    guess: Guess,
    opts: SolveOptions,
) -> Result<SolveOutcome> {
    let start = match guess {
        Guess::Unknowns(u) => u,
        Guess::Grid(u) => unknowns_from_grid(g, prob, &u)?,
    };
    if start.vertex_values.len() != g.vertex_count() || start.edges.len() != g.edge_count() {
        return Err(Error::InvalidArgument("shooting data does not match the graph".into()));
    }
    let all_finite = start.pack().iter().all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::InvalidArgument("guess is not finite".into()));
    }
    for (e, p) in g.edges().iter().zip(&start.edges) {
        let ok = match p {
            EdgeParam::Slope(_) => e.is_bounded() && !e.is_loop(),
            EdgeParam::Loop { .. } => e.is_loop(),
            _ => e.is_half_line(),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "shooting parameter {p:?} does not fit edge '{}'",
                e.name
            )));
        }
    }
    let shooter = Shooter { g, prob, opts };
    let residual = |x: &[f64]| -> Option<Vec<f64>> {
        shooter
            .evaluate(&start.unpack(x), false)
            .ok()
            .map(|ev| ev.residual)
            .filter(|r| r.iter().all(|v| v.is_finite()))
    };

    let mut x = start.pack();
    let mut f = residual(&x).ok_or_else(|| {
        Error::NoSolution("shooting map cannot be evaluated at the initial guess".into())
    })?;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let fnorm = sup(&f);
        if fnorm <= 1e-12 * sup(&x).max(1.0) {
            break;
        }
        iterations += 1;
        let (m, n) = (f.len(), x.len());
        let mut jac = DMatrix::zeros(m, n);
        for j in 0..n {
            let step = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += step;
            let fp = residual(&xp).ok_or_else(|| {
                Error::NoSolution("shooting map failed while differencing".into())
            })?;
            for i in 0..m {
                jac[(i, j)] = (fp[i] - f[i]) / step;
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let rhs = -DVector::from_vec(f.clone());
        let delta = svd
            .solve(&rhs, 1e-10 * smax.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::NoSolution(format!("least-squares step failed: {e}")))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=8 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
            if let Some(ft) = residual(&trial) {
                if sup(&ft) < fnorm {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted || t * sup(delta.as_slice()) <= 1e-15 * sup(&x).max(1.0) {
            break;
        }
    }
    let unknowns = start.unpack(&x);
    let candidate = shooter.build(&unknowns)?;
    let converged = candidate.report().passes(opts.tol);
    let trivial = candidate.is_trivial();
    Ok(SolveOutcome {
        candidate,
        unknowns,
        converged,
        trivial,
        iterations,
    })
}

/// Evaluate the shooting data without iterating (used by builders).
pub(crate) fn candidate_from_unknowns(
    g: &MetricGraph,
    prob: &NlsProblem,
    x: &ShootingUnknowns,
    opts: SolveOptions,
) -> Result<SolutionCandidate> {
    Shooter { g, prob, opts }.build(x)
}
