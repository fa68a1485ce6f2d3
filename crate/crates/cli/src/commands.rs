//! graph, ode, solve, spectrum, morse and nodal.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use graphnls::graph::{load_graph, GraphDocument, MetricGraph};
use graphnls::grid::{EdgeGrid, GridFunction};
use graphnls::io::{read_solution, write_eigenvectors, write_solution, write_spectrum, write_trajectory};
use graphnls::morse::{default_morse_h, morse_index, morse_index_study};
use graphnls::nls::{
    bifurcation_guess, build_four_star_family, build_line_soliton, build_tadpole_compact_support,
    build_three_bridge_eigenfunction, count_nodal_zones, ground_state_guess, solve_stationary, weak_residual_battery,
    FourStarVariant, Guess, SolveOptions,
};
use graphnls::ode::{count_zeros, integrate, OdeState, Tolerance};
use graphnls::spectral::{default_h, eigenvalues};
use serde_json::{json, Value};

use crate::args::{coefficient, load_graph_arg, problem, read_candidate};
use crate::output::{CliError, CliResult, Ctx};

#[derive(Debug, Subcommand)]
pub enum GraphCmd {
    /// Check a graph document and print a summary.
    Validate { file: PathBuf },
    /// Print the document of a built-in graph: three-bridge, four-star,
    /// star:k, line, tadpole:len,n, interval:len, circle:len.
    Builtin { name: String },
}

fn graph_summary(g: &MetricGraph) -> Value {
    json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "half_lines": g.half_lines().count(),
        "compact": g.is_compact(),
        "components": g.component_count(),
        "core_length": g.bounded_edges().map(|e| e.length).sum::<f64>(),
    })
}

pub fn graph(ctx: &Ctx, cmd: &GraphCmd) -> CliResult {
    match cmd {
        GraphCmd::Validate { file } => {
            if ctx.dry_run {
                return Ok(json!({"dry_run": true, "command": "graph validate", "inputs": {"file": file}, "outputs": []}));
            }
            let text = std::fs::read_to_string(file)
                .map_err(|e| CliError::invalid_graph(format!("cannot read '{}': {e}", file.display())))?;
            let g = load_graph(&text).map_err(|e| CliError::invalid_graph(format!("{}: {e}", file.display())))?;
            Ok(json!({"valid": true, "graph": graph_summary(&g)}))
        }
        GraphCmd::Builtin { name } => {
            let (g, source) = load_graph_arg(name)?;
            if ctx.dry_run {
                return Ok(json!({"dry_run": true, "command": "graph builtin", "inputs": source, "outputs": []}));
            }
            serde_json::to_value(GraphDocument::from_graph(&g)).map_err(|e| CliError::new("serialize", e.to_string()))
        }
    }
}

#[derive(Debug, Args)]
pub struct OdeArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Constant potential.
    #[arg(long = "W", default_value_t = 0.0)]
    pub w: f64,
    /// Constant nonlinearity weight.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long)]
    pub u0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub du0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub start: f64,
    #[arg(long)]
    pub length: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
}

/// Integrate `u'' = (W + λ) u - ρ |u|^{p-2} u` from `(u0, du0)`.
pub fn ode(ctx: &Ctx, a: &OdeArgs) -> CliResult {
    let inputs = json!({
        "p": a.p, "lambda": a.lambda, "W": a.w, "rho": a.rho, "u0": a.u0, "du0": a.du0,
        "start": a.start, "length": a.length, "rtol": a.rtol, "atol": a.atol,
    });
    if ctx.dry_run {
        return Ok(ctx.plan("ode", inputs, &["trajectory.csv", "ode.json"]));
    }
    if !(a.p > 2.0) {
        return Err(CliError::usage("p must exceed 2"));
    }
    let tol = Tolerance::new(a.rtol, a.atol)?;
    let (k, rho, p) = (a.w + a.lambda, a.rho, a.p);
    let traj = integrate(
        |_, u| k * u - rho * u.abs().powf(p - 2.0) * u,
        a.start,
        OdeState::new(a.u0, a.du0),
        a.start + a.length,
        tol,
    )?;
    let energy = |s: OdeState| 0.5 * s.du * s.du + rho * s.u.abs().powf(p) / p - 0.5 * k * s.u * s.u;
    let h0 = energy(traj.state(0));
    let (mut drift, mut scale) = (0.0f64, h0.abs());
    for i in 0..traj.len() {
        let s = traj.state(i);
        drift = drift.max((energy(s) - h0).abs());
        scale = scale.max(0.5 * s.du * s.du + 0.5 * k.abs() * s.u * s.u);
    }
    let end = traj.last();
    let summary = json!({
        "inputs": inputs,
        "steps": traj.steps(),
        "zeros": count_zeros(&traj),
        "energy": h0,
        "energy_drift": drift,
        "energy_drift_relative": drift / scale.max(f64::MIN_POSITIVE),
        "end": {"x": traj.end(), "u": end.u, "du": end.du},
    });
    let mut out = ctx.artifacts();
    out.csv("trajectory.csv", |w| write_trajectory(&traj, w))?;
    out.json("ode.json", &summary)?;
    out.finish(summary)
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Graph document or built-in name.
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Potential: number, coefficient JSON or JSON file.
    #[arg(long = "W", default_value = "0")]
    pub w: String,
    #[arg(long, default_value = "1")]
    pub rho: String,
    /// Starting guess: a solution CSV, `const:c`, `ground`, `bifurcation`,
    /// `soliton`, `four-star-near`, `four-star-far`, `tadpole` or
    /// `three-bridge:k`.
    #[arg(long)]
    pub seed: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Output spacing on bounded edges.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Random test functions for the weak-form check.
    #[arg(long, default_value_t = 50)]
    pub weak: usize,
    /// Seed of the test-function generator.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

fn seed_guess(
    g: &MetricGraph,
    prob: &graphnls::coeff::NlsProblem,
    seed: &str,
    opts: SolveOptions,
) -> Result<GridFunction, CliError> {
    let path = std::path::Path::new(seed);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(read_solution(g, text.as_bytes())?);
    }
    let (name, arg) = seed.split_once(':').unwrap_or((seed, ""));
    let num = |d: f64| -> Result<f64, CliError> {
        if arg.is_empty() {
            Ok(d)
        } else {
            arg.parse().map_err(|_| CliError::usage(format!("bad seed parameter in '{seed}'")))
        }
    };
    let example = match name {
        "const" => {
            let c = num(1.0)?;
            let grids: Vec<EdgeGrid> = g
                .edges()
                .iter()
                .map(|e| EdgeGrid::new(if e.is_bounded() { e.length } else { 10.0 }, 101))
                .collect::<graphnls::Result<_>>()?;
            let bounded: Vec<bool> = g.edges().iter().map(|e| e.is_bounded()).collect();
            let (u, _) = GridFunction::sample(g, &grids, vec![None; g.edge_count()], |e, s| {
                if bounded[e.0] {
                    (c, 0.0)
                } else {
                    (c * (-s).exp(), -c * (-s).exp())
                }
            })?;
            return Ok(u);
        }
        "ground" => return Ok(ground_state_guess(g, prob, opts)?),
        "bifurcation" => return Ok(bifurcation_guess(g, prob, default_h(g), opts)?),
        "soliton" => build_line_soliton(prob.p, prob.lambda)?,
        "four-star-near" => build_four_star_family(prob.p, prob.lambda, FourStarVariant::Near)?,
        "four-star-far" => build_four_star_family(prob.p, prob.lambda, FourStarVariant::Far)?,
        "tadpole" => build_tadpole_compact_support(prob.p, prob.lambda, 2.0)?,
        "three-bridge" => build_three_bridge_eigenfunction(num(1.0)? as u32, [0.0, 1.0, -1.0, 0.0])?,
        _ => {
            return Err(CliError::usage(format!(
                "seed '{seed}' is neither a file nor a known seed (const:c, ground, bifurcation, soliton, \
                 four-star-near, four-star-far, tadpole, three-bridge:k)"
            )))
        }
    };
    if example.graph.edge_count() != g.edge_count() || example.graph.vertex_count() != g.vertex_count() {
        return Err(CliError::usage(format!(
            "seed '{seed}' lives on a graph with {} vertices and {} edges, not {} and {}",
            example.graph.vertex_count(),
            example.graph.edge_count(),
            g.vertex_count(),
            g.edge_count()
        )));
    }
    Ok(example.candidate.u().clone())
}

pub fn solve(ctx: &Ctx, a: &SolveArgs) -> CliResult {
    let (g, source) = load_graph_arg(&a.graph)?;
    let prob = problem(&g, a.p, a.lambda, &a.w, &a.rho)?;
    let opts = SolveOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        h: a.h,
        ..SolveOptions::default()
    };
    let inputs = json!({
        "graph": source, "p": a.p, "lambda": a.lambda, "W": a.w, "rho": a.rho, "seed": a.seed,
        "tol": a.tol, "h": a.h, "max_iter": a.max_iter, "weak": a.weak, "rng_seed": a.rng_seed,
    });
    if ctx.dry_run {
        return Ok(ctx.plan("solve", inputs, &["solution.csv", "residual.json"]));
    }
    let guess = seed_guess(&g, &prob, &a.seed, opts)?;
    let outcome = solve_stationary(&g, &prob, Guess::Grid(guess), opts)?;
    let c = &outcome.candidate;
    let weak = if a.weak > 0 {
        Some(weak_residual_battery(&g, c, a.weak, a.rng_seed)?)
    } else {
        None
    };
    let summary = json!({
        "inputs": inputs,
        "converged": outcome.converged,
        "trivial": outcome.trivial,
        "iterations": outcome.iterations,
        "report": c.report(),
        "residual_max": c.report().max(),
        "weak_residual": weak,
        "mass": c.u().l2_norm(),
        "max_abs": c.u().max_abs(),
        "unknowns": outcome.unknowns,
    });
    let mut out = ctx.artifacts();
    out.csv("solution.csv", |w| write_solution(&g, c.u(), w))?;
    out.json("residual.json", &summary)?;
    let summary = out.finish(summary)?;
    if !outcome.converged {
        return Err(CliError::new(
            "not-converged",
            format!("residual {:.3e} above tolerance {:e}; outputs kept in {}", c.report().max(), a.tol, ctx.out.display()),
        ));
    }
    Ok(summary)
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long = "W", default_value = "0")]
    pub w: String,
    #[arg(long, default_value_t = 7)]
    pub count: usize,
    /// Mesh size; 1e-3 times the longest edge by default.
    #[arg(long)]
    pub h: Option<f64>,
    /// Also write the eigenvectors.
    #[arg(long)]
    pub vectors: bool,
}

pub fn spectrum(ctx: &Ctx, a: &SpectrumArgs) -> CliResult {
    let (g, source) = load_graph_arg(&a.graph)?;
    let w = coefficient(&g, &a.w, 0.0)?;
    let h = a.h.unwrap_or_else(|| default_h(&g));
    let inputs = json!({"graph": source, "W": a.w, "count": a.count, "h": h, "vectors": a.vectors});
    let mut files = vec!["spectrum.csv", "spectrum.json"];
    if a.vectors {
        files.push("eigenvectors.csv");
    }
    if ctx.dry_run {
        return Ok(ctx.plan("spectrum", inputs, &files));
    }
    let s = eigenvalues(&g, &w, a.count, h)?;
    let summary = json!({
        "inputs": inputs,
        "eigenvalues": s.values,
        "clusters": s.clusters,
        "lambda_one": -s.values[0],
        "thresholds": s.values.iter().map(|v| -v).collect::<Vec<_>>(),
    });
    let mut out = ctx.artifacts();
    out.csv("spectrum.csv", |wr| write_spectrum(&s, wr))?;
    if a.vectors {
        out.csv("eigenvectors.csv", |wr| write_eigenvectors(&g, &s, wr))?;
    }
    out.json("spectrum.json", &summary)?;
    out.finish(summary)
}

#[derive(Debug, Args)]
pub struct SolutionArgs {
    /// Solution CSV.
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "W", default_value = "0")]
    pub w: String,
    #[arg(long, default_value = "1")]
    pub rho: String,
}

#[derive(Debug, Args)]
pub struct MorseArgs {
    #[command(flatten)]
    pub sol: SolutionArgs,
    /// Mesh size; chosen from λ and the graph by default.
    #[arg(long)]
    pub h: Option<f64>,
    /// Truncation radius on half-lines.
    #[arg(long = "r-tr")]
    pub r_tr: Option<f64>,
    /// One run at `h` instead of three refinements plus a doubled truncation.
    #[arg(long)]
    pub single: bool,
}

pub fn morse(ctx: &Ctx, a: &MorseArgs) -> CliResult {
    let s = &a.sol;
    let (g, source) = load_graph_arg(&s.graph)?;
    let prob = problem(&g, s.p, s.lambda, &s.w, &s.rho)?;
    let h = a.h.unwrap_or_else(|| default_morse_h(&g, s.lambda));
    let inputs = json!({
        "solution": s.solution, "graph": source, "p": s.p, "lambda": s.lambda, "W": s.w, "rho": s.rho,
        "h": h, "R_tr": a.r_tr, "single": a.single,
    });
    if ctx.dry_run {
        return Ok(ctx.plan("morse", inputs, &["morse.json"]));
    }
    let c = read_candidate(&g, &s.solution, prob)?;
    let summary = if a.single {
        let r = morse_index(&g, &c, h, a.r_tr)?;
        json!({"inputs": inputs, "index": r.index, "gap": r.gap, "h": r.h, "R_tr": r.r_tr, "refinements": [r], "stable": true})
    } else {
        let st = morse_index_study(&g, &c, h, a.r_tr)?;
        let finest = &st.runs[2];
        json!({
            "inputs": inputs, "index": st.index, "gap": finest.gap, "h": finest.h, "R_tr": finest.r_tr,
            "refinements": st.runs, "stable": st.stable,
        })
    };
    let mut out = ctx.artifacts();
    out.json("morse.json", &summary)?;
    out.finish(summary)
}

#[derive(Debug, Args)]
pub struct NodalArgs {
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub graph: String,
    /// Nonlinearity weight; zones meeting its support count as outside `G₀`.
    #[arg(long, default_value = "1")]
    pub rho: String,
}

pub fn nodal(ctx: &Ctx, a: &NodalArgs) -> CliResult {
    let (g, source) = load_graph_arg(&a.graph)?;
    let rho = coefficient(&g, &a.rho, 1.0)?;
    let inputs = json!({"solution": a.solution, "graph": source, "rho": a.rho});
    if ctx.dry_run {
        return Ok(ctx.plan("nodal", inputs, &["nodal.json"]));
    }
    let text = std::fs::read_to_string(&a.solution)?;
    let u = read_solution(&g, text.as_bytes())?;
    let n = count_nodal_zones(&g, &u, &rho);
    let summary = json!({"inputs": inputs, "total": n.total, "outside_g0": n.outside_g0});
    let mut out = ctx.artifacts();
    out.json("nodal.json", &summary)?;
    out.finish(summary)
}
