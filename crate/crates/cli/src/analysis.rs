//! blowup, massrate, decayfit and barrier.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use graphnls::asymptotics::{
    build_barrier, decay_fit, find_local_maxima, lower_bound_max, mass_curve, mass_scaling_curve, rescale_profile,
    BlowupFamily, BranchSeed, Chart, LocalMax, Scenario,
};
use graphnls::graph::{distance, GraphPoint, MetricGraph};
use graphnls::nls::{
    bifurcation_guess, build_four_star_family, build_line_soliton, ground_state_guess, solve_stationary,
    tadpole_branch, BuiltExample, FourStarVariant, Guess, SolutionCandidate, SolveOptions,
};
use graphnls::spectral::default_h;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{lambda_list, load_graph_arg, point, point_json, problem, read_candidate};
use crate::gnuplot;
use crate::output::{Artifacts, CliError, CliResult, Ctx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// The soliton on the line.
    Soliton,
    /// Four-star peaks at distance λ^{-1/2} from the center.
    FourStarNear,
    /// Four-star peaks at distance 1 from the center.
    FourStarFar,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::Soliton => "soliton",
            Self::FourStarNear => "four-star-near",
            Self::FourStarFar => "four-star-far",
        }
    }

    pub fn build(self, p: f64, lambda: f64) -> graphnls::Result<BuiltExample> {
        match self {
            Self::Soliton => build_line_soliton(p, lambda),
            Self::FourStarNear => build_four_star_family(p, lambda, FourStarVariant::Near),
            Self::FourStarFar => build_four_star_family(p, lambda, FourStarVariant::Far),
        }
    }

    pub fn family(self, p: f64, lambdas: &[f64]) -> graphnls::Result<BlowupFamily> {
        match self {
            Self::Soliton => BlowupFamily::soliton_family(p, lambdas),
            Self::FourStarNear => BlowupFamily::four_star_family(p, lambdas, FourStarVariant::Near),
            Self::FourStarFar => BlowupFamily::four_star_family(p, lambdas, FourStarVariant::Far),
        }
    }
}

/// Maxima closer than `radius / √λ` merge into one selected point.
pub fn selected_points(g: &MetricGraph, lambda: f64, maxima: &[LocalMax], radius: f64) -> usize {
    let n = maxima.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for i in 0..n {
        for j in i + 1..n {
            if lambda.sqrt() * distance(g, maxima[i].point, maxima[j].point) < radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

fn maxima_json(g: &MetricGraph, maxima: &[LocalMax]) -> Value {
    json!(maxima
        .iter()
        .map(|m| json!({"edge": g.edge(m.point.edge).name, "s": m.point.s, "value": m.value}))
        .collect::<Vec<_>>())
}

#[derive(Debug, Serialize)]
pub struct ProfileRow {
    branch: usize,
    y: f64,
    u: f64,
}

/// Rescaled profile around the largest maximum as CSV rows plus a chart
/// description.
pub fn profile_rows(
    g: &MetricGraph,
    c: &SolutionCandidate,
    maxima: &[LocalMax],
    radius: f64,
) -> Result<(Vec<ProfileRow>, Value), CliError> {
    let Some(top) = maxima.iter().max_by(|a, b| a.value.abs().total_cmp(&b.value.abs())) else {
        return Ok((Vec::new(), Value::Null));
    };
    let prof = rescale_profile(g, c.u(), c.prob().p, top.point, radius, 401)?;
    let mut rows = Vec::new();
    let chart = match prof.chart {
        Chart::Line => {
            for k in 0..=400 {
                let y = -radius + 2.0 * radius * k as f64 / 400.0;
                if let Some(u) = prof.line_value(y) {
                    rows.push(ProfileRow { branch: 0, y, u });
                }
            }
            json!({"kind": "line", "eps": prof.eps, "amplitude": prof.amplitude})
        }
        Chart::Star { vertex, branch, y_hat } => {
            for b in 0..prof.branches.len() {
                for k in 0..=400 {
                    let y = radius * k as f64 / 400.0;
                    if let Some(u) = prof.branch_value(b, y) {
                        rows.push(ProfileRow { branch: b, y, u });
                    }
                }
            }
            json!({
                "kind": "star", "vertex": g.vertex_name(vertex), "branch": branch, "y_hat": y_hat,
                "branches": prof.branches.len(), "eps": prof.eps, "amplitude": prof.amplitude,
            })
        }
    };
    Ok((rows, chart))
}

#[derive(Debug, Args)]
pub struct BlowupArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    /// `log:a:b:n`, `linear:a:b:n` or a list.
    #[arg(long, default_value = "log:1e2:1e4:5")]
    pub lambdas: String,
    /// Exponents for the mass scaling curve.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub q: Vec<f64>,
    /// Rescaled radius for merging maxima and for the profile window.
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
}

#[derive(Debug, Serialize)]
struct BlowupRow {
    lambda: f64,
    local_maxima: usize,
    selected: usize,
    separation: Option<f64>,
    max_value: f64,
    lower_bound: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ScalingRow {
    q: f64,
    lambda: f64,
    integral: f64,
    scaled: f64,
}

pub fn blowup(ctx: &Ctx, a: &BlowupArgs) -> CliResult {
    let lambdas = lambda_list(&a.lambdas)?;
    let inputs = json!({"family": a.family.name(), "p": a.p, "lambdas": lambdas, "q": a.q, "radius": a.radius});
    let mut files = vec!["blowup.csv", "mass_scaling.csv", "profile.csv", "blowup.json"];
    if ctx.gnuplot {
        files.extend(["mass_scaling.gp", "profile.gp"]);
    }
    if ctx.dry_run {
        return Ok(ctx.plan("blowup", inputs, &files));
    }
    let mut out = ctx.artifacts();
    let summary = blowup_into(ctx, &mut out, a.family, a.p, &lambdas, &a.q, a.radius, inputs)?;
    out.finish(summary)
}

#[allow(clippy::too_many_arguments)]
pub fn blowup_into(
    ctx: &Ctx,
    out: &mut Artifacts,
    family: Family,
    p: f64,
    lambdas: &[f64],
    qs: &[f64],
    radius: f64,
    inputs: Value,
) -> CliResult {
    let fam = family.family(p, lambdas)?;
    let sep = fam.separation();
    let mut rows = Vec::new();
    let mut lower_ok = true;
    for (m, s) in fam.members.iter().zip(&sep) {
        let lb = lower_bound_max(m.candidate.prob());
        if let Some(lb) = lb {
            lower_ok &= m.maxima.iter().all(|x| x.value.abs() >= lb - 1e-6);
        }
        rows.push(BlowupRow {
            lambda: m.lambda,
            local_maxima: m.maxima.len(),
            selected: selected_points(&fam.graph, m.lambda, &m.maxima, radius),
            separation: *s,
            max_value: m.candidate.u().max_abs(),
            lower_bound: lb,
        });
    }
    let mut scaling = Vec::new();
    let mut spreads = Vec::new();
    for &q in qs {
        let curve = mass_scaling_curve(&fam, q)?;
        let (lo, hi) = curve
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.scaled), hi.max(r.scaled)));
        let spread = (hi - lo) / hi.abs().max(f64::MIN_POSITIVE);
        spreads.push(json!({"q": q, "spread": spread, "constant": spread < 1e-6}));
        scaling.extend(curve.into_iter().map(|r| ScalingRow {
            q,
            lambda: r.lambda,
            integral: r.integral,
            scaled: r.scaled,
        }));
    }
    let last = fam.members.last().expect("nonempty family");
    let (profile, chart) = profile_rows(&fam.graph, &last.candidate, &last.maxima, radius)?;
    let members: Vec<Value> = fam
        .members
        .iter()
        .zip(&rows)
        .map(|(m, r)| {
            json!({
                "lambda": m.lambda, "local_maxima": r.local_maxima, "selected": r.selected,
                "maxima": maxima_json(&fam.graph, &m.maxima), "radii": m.radii, "separation": r.separation,
            })
        })
        .collect();
    let constant = spreads.iter().all(|s| s["constant"] == json!(true));
    let summary = json!({
        "inputs": inputs,
        "members": members,
        "mass_scaling": spreads,
        "profile_chart": chart,
        "passes": {"mass_scaling_constant": constant, "lower_bound_max": lower_ok},
    });
    out.records("blowup.csv", &rows)?;
    out.records("mass_scaling.csv", &scaling)?;
    out.records("profile.csv", &profile)?;
    out.json("blowup.json", &summary)?;
    if ctx.gnuplot {
        out.text("mass_scaling.gp", gnuplot::mass_scaling(qs));
        out.text("profile.gp", gnuplot::profile());
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Compact,
    Localized,
    Nls,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Compact => Scenario::Compact,
            ScenarioArg::Localized => Scenario::Localized,
            ScenarioArg::Nls => Scenario::Nls,
        }
    }
}

#[derive(Debug, Args)]
pub struct MassrateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    #[arg(long)]
    pub lambdas: String,
    /// `soliton` (line), `tadpole` (localized tadpole branch), `ground` or
    /// `bifurcation` (compact `--graph`), or a solution CSV at `--lambda0`.
    #[arg(long)]
    pub seed: String,
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long = "W", default_value = "0")]
    pub w: String,
    #[arg(long, default_value = "1")]
    pub rho: String,
    /// `λ` of a seed CSV.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Compute Morse indices along the branch.
    #[arg(long)]
    pub morse: bool,
    /// Keep only points with Morse index at most this (needs `--morse`).
    #[arg(long)]
    pub m_star: Option<usize>,
}

pub struct MassInputs<'a> {
    pub scenario: Scenario,
    pub p: f64,
    pub lambdas: &'a [f64],
    pub seed: &'a str,
    pub graph: Option<MetricGraph>,
    pub w: &'a str,
    pub rho: &'a str,
    pub lambda0: Option<f64>,
    pub morse: bool,
    pub m_star: Option<usize>,
    pub opts: SolveOptions,
}

fn mass_seed(m: &MassInputs<'_>) -> Result<(MetricGraph, BranchSeed), CliError> {
    let opts = m.opts;
    let l0 = m.lambdas[0];
    match m.seed {
        "soliton" => {
            let ex = build_line_soliton(m.p, l0)?;
            let prob = ex.candidate.prob().clone();
            Ok((
                ex.graph,
                BranchSeed::Continue {
                    seed: ex.candidate,
                    prob,
                    opts,
                },
            ))
        }
        "tadpole" => {
            let branch = tadpole_branch(m.p, m.lambdas)?;
            let g = branch[0].2.graph.clone();
            Ok((g, BranchSeed::Points(branch.into_iter().map(|(l, _, ex)| (l, ex.candidate)).collect())))
        }
        other => {
            let g = m
                .graph
                .clone()
                .ok_or_else(|| CliError::usage(format!("seed '{other}' needs --graph")))?;
            let seed = match other {
                "ground" | "bifurcation" => {
                    let prob = problem(&g, m.p, l0, m.w, m.rho)?;
                    let guess = if other == "ground" {
                        ground_state_guess(&g, &prob, opts)?
                    } else {
                        bifurcation_guess(&g, &prob, default_h(&g), opts)?
                    };
                    let out = solve_stationary(&g, &prob, Guess::Grid(guess), opts)?;
                    if !out.converged || out.trivial {
                        return Err(CliError::new(
                            "not-converged",
                            format!("{other} seed did not converge at lambda = {l0}"),
                        ));
                    }
                    out.candidate
                }
                path => {
                    let l = m
                        .lambda0
                        .ok_or_else(|| CliError::usage("a seed CSV needs --lambda0"))?;
                    let prob = problem(&g, m.p, l, m.w, m.rho)?;
                    read_candidate(&g, &PathBuf::from(path), prob)?
                }
            };
            let prob = seed.prob().clone();
            Ok((g, BranchSeed::Continue { seed, prob, opts }))
        }
    }
}

/// Mass curve artifacts shared by `massrate` and `run`.
pub fn mass_into(ctx: &Ctx, out: &mut Artifacts, m: &MassInputs<'_>, inputs: Value) -> CliResult {
    let (g, seed) = mass_seed(m)?;
    let curve = mass_curve(m.scenario, &g, m.p, m.m_star, m.lambdas, vec![seed], m.morse)?;
    let fit = |s: Option<f64>| match (s, curve.predicted) {
        (Some(s), Some(k)) => Some((s - k).abs() <= 0.02),
        _ => None,
    };
    let scaled: Vec<f64> = match curve.predicted {
        Some(k) => curve.envelope.iter().map(|(l, mass)| mass * l.powf(-k)).collect(),
        None => Vec::new(),
    };
    let variation = if scaled.is_empty() {
        None
    } else {
        let (lo, hi) = scaled
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        Some((hi - lo) / lo)
    };
    let summary = json!({
        "inputs": inputs,
        "scenario": curve.scenario,
        "predicted": curve.predicted,
        "slope_low": curve.slope_low,
        "slope_high": curve.slope_high,
        "scaled_variation": variation,
        "converged": curve.rows.iter().filter(|r| r.mass.is_some()).count(),
        "failed": curve.rows.iter().filter(|r| r.mass.is_none()).count(),
        "passes": {"slope_low": fit(curve.slope_low), "slope_high": fit(curve.slope_high)},
    });
    let envelope: Vec<Value> = curve.envelope.iter().map(|(l, mass)| json!({"lambda": l, "mass": mass})).collect();
    #[derive(Serialize)]
    struct Env {
        lambda: f64,
        mass: f64,
    }
    let env: Vec<Env> = curve.envelope.iter().map(|&(lambda, mass)| Env { lambda, mass }).collect();
    out.records("mass.csv", &curve.rows)?;
    out.records("envelope.csv", &env)?;
    let mut full = summary.clone();
    full["envelope"] = json!(envelope);
    out.json("mass.json", &full)?;
    if ctx.gnuplot {
        out.text("mass.gp", gnuplot::mass_curve(curve.predicted));
    }
    Ok(summary)
}

pub fn massrate(ctx: &Ctx, a: &MassrateArgs) -> CliResult {
    let lambdas = lambda_list(&a.lambdas)?;
    if a.m_star.is_some() && !a.morse {
        return Err(CliError::usage("--m-star needs --morse"));
    }
    let graph = match &a.graph {
        Some(spec) => Some(load_graph_arg(spec)?.0),
        None => None,
    };
    let m = MassInputs {
        scenario: a.scenario.into(),
        p: a.p,
        lambdas: &lambdas,
        seed: &a.seed,
        graph,
        w: &a.w,
        rho: &a.rho,
        lambda0: a.lambda0,
        morse: a.morse,
        m_star: a.m_star,
        opts: SolveOptions::default(),
    };
    let inputs = json!({
        "scenario": m.scenario, "p": a.p, "lambdas": lambdas, "seed": a.seed, "graph": a.graph,
        "W": a.w, "rho": a.rho, "lambda0": a.lambda0, "morse": a.morse, "m_star": a.m_star,
    });
    if ctx.dry_run {
        let mut files = vec!["mass.csv", "envelope.csv", "mass.json"];
        if ctx.gnuplot {
            files.push("mass.gp");
        }
        return Ok(ctx.plan("massrate", inputs, &files));
    }
    let mut out = ctx.artifacts();
    let summary = mass_into(ctx, &mut out, &m, inputs)?;
    out.finish(summary)
}

#[derive(Debug, Args)]
pub struct DecayfitArgs {
    /// Built-in family; otherwise `--solution` and friends.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    /// Grid for `--family`.
    #[arg(long, default_value = "1e2,1e3,1e4")]
    pub lambdas: String,
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "W", default_value = "0")]
    pub w: String,
    #[arg(long, default_value = "1")]
    pub rho: String,
    /// Centers `edge:s` or vertex names; the local maxima by default.
    #[arg(long, value_delimiter = ',')]
    pub center: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct DecayRow {
    lambda: f64,
    slope: f64,
    bound_rate: f64,
    exact_deviation: f64,
    constant: f64,
    samples: usize,
    residual: f64,
    passes: bool,
}

fn decay_row(g: &MetricGraph, c: &SolutionCandidate, centers: &[GraphPoint]) -> Result<DecayRow, CliError> {
    let r = decay_fit(g, c, centers)?;
    let k = c.lambda().sqrt();
    Ok(DecayRow {
        lambda: c.lambda(),
        slope: r.slope,
        bound_rate: r.bound_rate,
        exact_deviation: (r.slope + k).abs() / k,
        constant: r.constant,
        samples: r.samples,
        residual: r.residual,
        passes: r.passes,
    })
}

fn centers_of(g: &MetricGraph, c: &SolutionCandidate, given: &[String]) -> Result<Vec<GraphPoint>, CliError> {
    if given.is_empty() {
        Ok(find_local_maxima(g, c.u()).into_iter().map(|m| m.point).collect())
    } else {
        given.iter().map(|s| point(g, s)).collect()
    }
}

pub fn decayfit(ctx: &Ctx, a: &DecayfitArgs) -> CliResult {
    let mut files = vec!["decay.csv", "decay.json"];
    if ctx.gnuplot {
        files.push("decay.gp");
    }
    let rows = match (a.family, &a.solution) {
        (Some(f), None) => {
            let lambdas = lambda_list(&a.lambdas)?;
            let inputs = json!({"family": f.name(), "p": a.p, "lambdas": lambdas, "center": a.center});
            if ctx.dry_run {
                return Ok(ctx.plan("decayfit", inputs, &files));
            }
            let rows = family_decay_rows(f, a.p, &lambdas, &a.center)?;
            (inputs, rows)
        }
        (None, Some(path)) => {
            let spec = a.graph.as_deref().ok_or_else(|| CliError::usage("--solution needs --graph"))?;
            let lambda = a.lambda.ok_or_else(|| CliError::usage("--solution needs --lambda"))?;
            let (g, source) = load_graph_arg(spec)?;
            let inputs = json!({
                "solution": path, "graph": source, "p": a.p, "lambda": lambda, "W": a.w, "rho": a.rho,
                "center": a.center,
            });
            if ctx.dry_run {
                return Ok(ctx.plan("decayfit", inputs, &files));
            }
            let prob = problem(&g, a.p, lambda, &a.w, &a.rho)?;
            let c = read_candidate(&g, path, prob)?;
            let centers = centers_of(&g, &c, &a.center)?;
            (inputs, vec![decay_row(&g, &c, &centers)?])
        }
        _ => return Err(CliError::usage("give exactly one of --family or --solution")),
    };
    let (inputs, rows) = rows;
    let mut out = ctx.artifacts();
    let summary = decay_into(ctx, &mut out, &rows, inputs)?;
    out.finish(summary)
}

pub fn family_decay_rows(f: Family, p: f64, lambdas: &[f64], center: &[String]) -> Result<Vec<DecayRow>, CliError> {
    let mut rows = Vec::new();
    for &l in lambdas {
        let ex = f.build(p, l)?;
        let centers = centers_of(&ex.graph, &ex.candidate, center)?;
        rows.push(decay_row(&ex.graph, &ex.candidate, &centers)?);
    }
    Ok(rows)
}

pub fn decay_into(ctx: &Ctx, out: &mut Artifacts, rows: &[DecayRow], inputs: Value) -> CliResult {
    let summary = json!({
        "inputs": inputs,
        "rows": rows,
        "passes": {"bound": rows.iter().all(|r| r.passes)},
    });
    out.records("decay.csv", rows)?;
    out.json("decay.json", &summary)?;
    if ctx.gnuplot {
        out.text("decay.gp", gnuplot::decay());
    }
    Ok(summary)
}

#[derive(Debug, Args)]
pub struct BarrierArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub lambda: f64,
    /// Centers `edge:s` or vertex names, comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub center: Vec<String>,
    /// `A_R` is the set at distance at least `R/√λ` from the centers.
    #[arg(long = "R", default_value_t = 8.0)]
    pub r: f64,
    /// Samples per piece in the CSV.
    #[arg(long, default_value_t = 200)]
    pub cells: usize,
    /// Compare with a solution CSV (needs `--p`).
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "W", default_value = "0")]
    pub w: String,
    #[arg(long, default_value = "1")]
    pub rho: String,
    /// `ε` in the comparison `ε λ^{1/(p-2)} e^{R/2} φ >= |u|`.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
}

#[derive(Debug, Serialize)]
struct BarrierRow {
    edge: String,
    s: f64,
    distance: f64,
    phi: f64,
}

pub fn barrier(ctx: &Ctx, a: &BarrierArgs) -> CliResult {
    let (g, source) = load_graph_arg(&a.graph)?;
    let centers: Vec<GraphPoint> = a.center.iter().map(|s| point(&g, s)).collect::<Result<_, _>>()?;
    let inputs = json!({
        "graph": source, "lambda": a.lambda, "center": centers.iter().map(|c| point_json(&g, c)).collect::<Vec<_>>(),
        "R": a.r, "cells": a.cells, "solution": a.solution, "p": a.p, "W": a.w, "rho": a.rho, "eps": a.eps,
    });
    let mut files = vec!["barrier.csv", "barrier.json"];
    if ctx.gnuplot {
        files.push("barrier.gp");
    }
    if ctx.dry_run {
        return Ok(ctx.plan("barrier", inputs, &files));
    }
    if a.cells == 0 {
        return Err(CliError::usage("--cells must be positive"));
    }
    let b = build_barrier(&g, a.lambda, &centers, a.r)?;
    let mut rows = Vec::new();
    let k = a.lambda.sqrt();
    for piece in &b.pieces {
        let span = if piece.end.is_finite() { piece.len() } else { 40.0 / k };
        for j in 0..=a.cells {
            let s = piece.start + span * j as f64 / a.cells as f64;
            rows.push(BarrierRow {
                edge: g.edge(piece.edge).name.clone(),
                s,
                distance: b.distance(&g, piece.edge, s),
                phi: piece.eval(s).0,
            });
        }
    }
    let comparison = match &a.solution {
        Some(path) => {
            let p = a.p.ok_or_else(|| CliError::usage("--solution needs --p"))?;
            let prob = problem(&g, p, a.lambda, &a.w, &a.rho)?;
            let c = read_candidate(&g, path, prob)?;
            Some(b.comparison(&c, a.eps))
        }
        None => None,
    };
    let summary = json!({
        "inputs": inputs,
        "threshold": b.threshold,
        "pieces": b.pieces.len(),
        "isolated": b.isolated.iter().map(|c| point_json(&g, c)).collect::<Vec<_>>(),
        "report": b.report,
        "comparison": comparison,
        "passes": {
            "barrier": b.report.all(),
            "comparison": comparison.map(|c| c.holds),
        },
    });
    let mut out = ctx.artifacts();
    out.records("barrier.csv", &rows)?;
    out.json("barrier.json", &summary)?;
    if ctx.gnuplot {
        out.text("barrier.gp", gnuplot::barrier());
    }
    out.finish(summary)
}
