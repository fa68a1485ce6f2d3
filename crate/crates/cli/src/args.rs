//! Parsing of graph, coefficient, grid and point arguments.

use std::path::Path;

use graphnls::coeff::{Coefficient, NlsProblem};
use graphnls::graph::{load_graph, GraphPoint, MetricGraph};
use graphnls::io::{builtin_graph, parse_coefficient, read_solution};
use graphnls::nls::SolutionCandidate;
use serde_json::{json, Value};

use crate::output::CliError;

/// `name` or `name:a,b,...` for a built-in graph.
pub fn parse_builtin(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = rest
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid_graph(format!("bad graph parameter '{s}' in '{spec}'")))
        })
        .collect::<Result<_, _>>()?;
    Ok((name.to_string(), params))
}

/// A graph from a JSON file, or a built-in `name[:params]` when no such file
/// exists. Every failure exits with the invalid-graph code.
pub fn load_graph_arg(spec: &str) -> Result<(MetricGraph, Value), CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid_graph(format!("cannot read '{spec}': {e}")))?;
        let g = load_graph(&text).map_err(|e| CliError::invalid_graph(format!("{spec}: {e}")))?;
        return Ok((g, json!({"kind": "file", "path": spec})));
    }
    let (name, params) = parse_builtin(spec)?;
    let g = builtin_graph(&name, &params).map_err(|e| match e {
        graphnls::Error::InvalidGraph(m) => CliError::invalid_graph(format!("'{spec}' is neither a file nor a built-in graph: {m}")),
        other => CliError::invalid_graph(other.to_string()),
    })?;
    Ok((g, json!({"kind": "builtin", "name": name, "params": params})))
}

/// A coefficient: a number, inline JSON, or a path to a JSON file.
pub fn coefficient(g: &MetricGraph, text: &str, default: f64) -> Result<Coefficient, CliError> {
    let path = Path::new(text);
    let body = if path.is_file() {
        std::fs::read_to_string(path)?
    } else {
        text.to_string()
    };
    Ok(parse_coefficient(g, &body, default)?)
}

/// `log:a:b:n`, `linear:a:b:n` or a comma-separated list.
pub fn lambda_list(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::usage(format!("bad lambda grid '{text}' (log:a:b:n, linear:a:b:n or a,b,c)"));
    let values = match parts.as_slice() {
        [kind @ ("log" | "linear"), a, b, n] => {
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            let n: usize = n.parse().map_err(|_| bad())?;
            let grid = graphnls::io::LambdaGrid {
                kind: if *kind == "log" {
                    graphnls::io::GridKind::Log
                } else {
                    graphnls::io::GridKind::Linear
                },
                start: a,
                end: b,
                count: n,
            };
            grid.values()?
        }
        [list] => list
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// `edge:s` for a point on an edge, or a vertex name.
pub fn point(g: &MetricGraph, text: &str) -> Result<GraphPoint, CliError> {
    if let Some((edge, s)) = text.rsplit_once(':') {
        let e = graphnls::io::edge_named(g, edge)?;
        let s: f64 = s
            .parse()
            .map_err(|_| CliError::usage(format!("bad coordinate in point '{text}'")))?;
        return Ok(GraphPoint::new(g, e, s)?);
    }
    let v = g
        .vertex_by_name(text)
        .ok_or_else(|| CliError::usage(format!("'{text}' is neither edge:s nor a vertex name")))?;
    Ok(GraphPoint::at_vertex(g, v)?)
}

pub fn problem(g: &MetricGraph, p: f64, lambda: f64, w: &str, rho: &str) -> Result<NlsProblem, CliError> {
    let w = coefficient(g, w, 0.0)?;
    let rho = coefficient(g, rho, 1.0)?;
    Ok(NlsProblem::with_coefficients(g, p, lambda, w, rho)?)
}

/// A solution CSV on `g`, wrapped with its residual report for `prob`.
pub fn read_candidate(g: &MetricGraph, path: &Path, prob: NlsProblem) -> Result<SolutionCandidate, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    let u = read_solution(g, std::io::BufReader::new(file))?;
    Ok(SolutionCandidate::new(g, u, prob, 0.0)?)
}

pub fn point_json(g: &MetricGraph, p: &GraphPoint) -> Value {
    json!({"edge": g.edge(p.edge).name, "s": p.s})
}
