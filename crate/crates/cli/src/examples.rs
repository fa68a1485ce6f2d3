//! Worked examples with explicit solutions.

use clap::{Args, Subcommand};
use graphnls::asymptotics::find_local_maxima;
use graphnls::coeff::Coefficient;
use graphnls::io::{write_solution, write_spectrum};
use graphnls::morse::{default_morse_h, morse_index_study};
use graphnls::nls::{
    build_tadpole_compact_support, build_three_bridge_eigenfunction, count_nodal_zones, tadpole_branch, tadpole_m0,
    BuiltExample,
};
use graphnls::spectral::eigenvalues;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{profile_rows, selected_points, Family};
use crate::args::lambda_list;
use crate::output::{Artifacts, CliResult, Ctx};

#[derive(Debug, Subcommand)]
pub enum ExampleCmd {
    /// `φ^k = b_i sin(kπx)` on the three-bridge with `ρ = (0, 0, 1)`, `p = 4`:
    /// spectrum, solution and Morse index.
    ThreeBridge(ThreeBridgeArgs),
    /// A periodic solution on the tadpole loop, zero on the half-line.
    Tadpole(TadpoleArgs),
    /// Four-star with two peaks at distance `λ^{-1/2}` from the center.
    FourStarNear(FourStarArgs),
    /// Four-star with two peaks at distance `1` from the center.
    FourStarFar(FourStarArgs),
    /// The tadpole branch with `ρ` supported on the loop, as `λ → 0`.
    TadpoleContinuation(TadpoleContinuationArgs),
}

#[derive(Debug, Args)]
pub struct ThreeBridgeArgs {
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b1: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub b2: f64,
    /// Mesh size for the spectrum.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Eigenvalues to compute.
    #[arg(long, default_value_t = 7)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct TadpoleArgs {
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Loop length.
    #[arg(long = "loop", default_value_t = 2.0)]
    pub loop_len: f64,
}

#[derive(Debug, Args)]
pub struct FourStarArgs {
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    #[arg(long, default_value_t = 100.0)]
    pub lambda: f64,
    /// Rescaled radius for merging maxima and for the profile window.
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct TadpoleContinuationArgs {
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    /// Increasing positive grid.
    #[arg(long, default_value = "log:1e-5:1e-2:6")]
    pub lambdas: String,
}

fn solution_report(ex: &BuiltExample) -> Value {
    let c = &ex.candidate;
    let n = count_nodal_zones(&ex.graph, c.u(), &c.prob().rho);
    json!({
        "lambda": c.lambda(),
        "p": c.prob().p,
        "report": c.report(),
        "mass": c.u().l2_norm(),
        "max_abs": c.u().max_abs(),
        "nodal": {"total": n.total, "outside_g0": n.outside_g0},
    })
}

fn three_bridge(a: &ThreeBridgeArgs, out: &mut Artifacts) -> CliResult {
    let ex = build_three_bridge_eigenfunction(a.k, [0.0, a.b1, a.b2, 0.0])?;
    let g = &ex.graph;
    let spec = eigenvalues(g, &Coefficient::constant(g, 0.0), a.count, a.h)?;
    let morse = morse_index_study(g, &ex.candidate, default_morse_h(g, ex.candidate.lambda()), None)?;
    let summary = json!({
        "example": "three-bridge",
        "k": a.k,
        "solution": solution_report(&ex),
        "spectrum": {"h": a.h, "eigenvalues": spec.values, "clusters": spec.clusters},
        "morse": {"index": morse.index, "stable": morse.stable, "refinements": morse.runs},
    });
    out.csv("solution.csv", |w| write_solution(g, ex.candidate.u(), w))?;
    out.csv("spectrum.csv", |w| write_spectrum(&spec, w))?;
    out.json("morse.json", &summary["morse"])?;
    out.json("three_bridge.json", &summary)?;
    Ok(summary)
}

fn tadpole(a: &TadpoleArgs, out: &mut Artifacts) -> CliResult {
    let ex = build_tadpole_compact_support(a.p, a.lambda, a.loop_len)?;
    let summary = json!({"example": "tadpole", "loop": a.loop_len, "solution": solution_report(&ex)});
    out.csv("solution.csv", |w| write_solution(&ex.graph, ex.candidate.u(), w))?;
    out.json("tadpole.json", &summary)?;
    Ok(summary)
}

fn four_star(ctx: &Ctx, family: Family, a: &FourStarArgs, out: &mut Artifacts) -> CliResult {
    let ex = family.build(a.p, a.lambda)?;
    let maxima = find_local_maxima(&ex.graph, ex.candidate.u());
    let selected = selected_points(&ex.graph, a.lambda, &maxima, a.radius);
    let (profile, chart) = profile_rows(&ex.graph, &ex.candidate, &maxima, a.radius)?;
    let summary = json!({
        "example": family.name(),
        "solution": solution_report(&ex),
        "local_maxima": maxima.len(),
        "selected": selected,
        "maxima": maxima.iter().map(|m| json!({
            "edge": ex.graph.edge(m.point.edge).name, "s": m.point.s, "value": m.value,
        })).collect::<Vec<_>>(),
        "radius": a.radius,
        "profile_chart": chart,
    });
    out.csv("solution.csv", |w| write_solution(&ex.graph, ex.candidate.u(), w))?;
    out.records("profile.csv", &profile)?;
    out.json("blowup.json", &summary)?;
    if ctx.gnuplot {
        out.text("profile.gp", crate::gnuplot::profile());
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct BranchRow {
    lambda: f64,
    m: f64,
    junction: f64,
    mass: f64,
    scaled: f64,
}

fn tadpole_continuation(a: &TadpoleContinuationArgs, out: &mut Artifacts) -> CliResult {
    let lambdas = lambda_list(&a.lambdas)?;
    let branch = tadpole_branch(a.p, &lambdas)?;
    let m0 = tadpole_m0(a.p)?;
    let limit = m0 / 2f64.sqrt();
    let rows: Vec<BranchRow> = branch
        .iter()
        .map(|(l, m, ex)| {
            let mass = ex.candidate.u().l2_norm();
            BranchRow {
                lambda: *l,
                m: *m,
                junction: ex.candidate.u().vertex_value(graphnls::graph::VertexId(0)),
                mass,
                scaled: l.powf(0.25) * mass,
            }
        })
        .collect();
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.scaled), hi.max(r.scaled)));
    let last = &branch.last().expect("nonempty grid").2;
    let summary = json!({
        "example": "tadpole-continuation",
        "p": a.p,
        "m0": m0,
        "limit": limit,
        "scaled_variation": (hi - lo) / lo,
        "closest_to_limit": rows.iter().map(|r| (r.scaled - limit).abs() / limit).fold(f64::INFINITY, f64::min),
        "rows": rows,
    });
    out.records("branch.csv", &rows)?;
    out.csv("solution.csv", |w| write_solution(&last.graph, last.candidate.u(), w))?;
    out.json("tadpole_continuation.json", &summary)?;
    Ok(summary)
}

pub fn examples(ctx: &Ctx, cmd: &ExampleCmd) -> CliResult {
    let (name, inputs, files): (&str, Value, &[&str]) = match cmd {
        ExampleCmd::ThreeBridge(a) => (
            "examples three-bridge",
            json!({"k": a.k, "b1": a.b1, "b2": a.b2, "h": a.h, "count": a.count}),
            &["morse.json", "solution.csv", "spectrum.csv", "three_bridge.json"],
        ),
        ExampleCmd::Tadpole(a) => (
            "examples tadpole",
            json!({"p": a.p, "lambda": a.lambda, "loop": a.loop_len}),
            &["solution.csv", "tadpole.json"],
        ),
        ExampleCmd::FourStarNear(a) | ExampleCmd::FourStarFar(a) => (
            "examples four-star",
            json!({"p": a.p, "lambda": a.lambda, "radius": a.radius}),
            &["blowup.json", "profile.csv", "solution.csv"],
        ),
        ExampleCmd::TadpoleContinuation(a) => (
            "examples tadpole-continuation",
            json!({"p": a.p, "lambdas": a.lambdas}),
            &["branch.csv", "solution.csv", "tadpole_continuation.json"],
        ),
    };
    if ctx.dry_run {
        return Ok(ctx.plan(name, inputs, files));
    }
    let mut out = ctx.artifacts();
    let summary = match cmd {
        ExampleCmd::ThreeBridge(a) => three_bridge(a, &mut out)?,
        ExampleCmd::Tadpole(a) => tadpole(a, &mut out)?,
        ExampleCmd::FourStarNear(a) => four_star(ctx, Family::FourStarNear, a, &mut out)?,
        ExampleCmd::FourStarFar(a) => four_star(ctx, Family::FourStarFar, a, &mut out)?,
        ExampleCmd::TadpoleContinuation(a) => tadpole_continuation(a, &mut out)?,
    };
    out.finish(summary)
}
