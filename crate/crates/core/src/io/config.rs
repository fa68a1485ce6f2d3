//! Experiment configuration and the coefficient mini-language.
//!
//! A coefficient is a JSON object mapping edge names, or one of the reserved
//! keys `"*"` (every edge), `"core"` (bounded edges) and `"halflines"`, to
//! `{"const": c}` or `{"samples": [...]}`. Later, more specific keys win:
//! `"*"`, then `"core"` / `"halflines"`, then edge names.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::coeff::{Coefficient, EdgeCoefficient};
use crate::error::{Error, Result};
use crate::graph::{circle, four_star, interval, load_graph, star_graph, tadpole, three_bridge, MetricGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CoefficientEntry {
    Const(f64),
    Samples(Vec<f64>),
}

pub type CoefficientSpec = BTreeMap<String, CoefficientEntry>;

fn entry(e: &CoefficientEntry, span: f64) -> EdgeCoefficient {
    match e {
        CoefficientEntry::Const(c) => EdgeCoefficient::Const(*c),
        CoefficientEntry::Samples(v) => EdgeCoefficient::Samples {
            span,
            values: v.clone(),
        },
    }
}

/// Resolve a spec on `g`; edges not mentioned get `default`. Samples on a
/// half-line span `sample_span`.
pub fn resolve_coefficient(
    g: &MetricGraph,
    spec: &CoefficientSpec,
    default: f64,
    sample_span: f64,
) -> Result<Coefficient> {
    for key in spec.keys() {
        if !matches!(key.as_str(), "*" | "core" | "halflines") && g.edge_by_name(key).is_none() {
            return Err(Error::Schema(format!("coefficient key '{key}' names no edge")));
        }
    }
    let out = g
        .edges()
        .iter()
        .map(|e| {
            let span = if e.is_bounded() { e.length } else { sample_span };
            let group = if e.is_bounded() { "core" } else { "halflines" };
            [e.name.as_str(), group, "*"]
                .iter()
                .find_map(|k| spec.get(*k))
                .map_or(EdgeCoefficient::Const(default), |c| entry(c, span))
        })
        .collect();
    let c = Coefficient(out);
    c.validate(g, "coefficient")?;
    Ok(c)
}

/// Parse a coefficient from JSON text; a bare number means that constant on
/// every edge.
pub fn parse_coefficient(g: &MetricGraph, text: &str, default: f64) -> Result<Coefficient> {
    if let Ok(c) = text.trim().parse::<f64>() {
        return Ok(Coefficient::constant(g, c));
    }
    let spec: CoefficientSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    resolve_coefficient(g, &spec, default, 50.0)
}

/// Graph source: a built-in name with parameters, or a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum GraphSource {
    Builtin {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    File {
        path: PathBuf,
    },
}

/// Built-in graphs: `three-bridge`, `four-star`, `star` (k), `tadpole`
/// (loop length, half-lines), `interval` (length), `circle` (length).
pub fn builtin_graph(name: &str, params: &[f64]) -> Result<MetricGraph> {
    let arg = |i: usize, d: f64| params.get(i).copied().unwrap_or(d);
    match name {
        "three-bridge" => Ok(three_bridge()),
        "four-star" => Ok(four_star()),
        "star" => star_graph(arg(0, 2.0) as usize),
        "line" => star_graph(2),
        "tadpole" => tadpole(arg(0, 2.0), arg(1, 1.0) as usize),
        "interval" => interval(arg(0, 1.0)),
        "circle" => circle(arg(0, 2.0 * std::f64::consts::PI)),
        _ => Err(Error::InvalidGraph(format!(
            "unknown built-in graph '{name}' (three-bridge, four-star, star, line, tadpole, interval, circle)"
        ))),
    }
}

impl GraphSource {
    pub fn load(&self) -> Result<MetricGraph> {
        match self {
            Self::Builtin { name, params } => builtin_graph(name, params),
            Self::File { path } => load_graph(&std::fs::read_to_string(path)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub kind: GridKind,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 || !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::InvalidArgument("lambda grid needs finite endpoints and count >= 1".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        match self.kind {
            GridKind::Linear => Ok((0..self.count)
                .map(|i| self.start + (self.end - self.start) * i as f64 / n)
                .collect()),
            GridKind::Log => {
                if !(self.start > 0.0 && self.end > 0.0) {
                    return Err(Error::InvalidArgument("log grid needs positive endpoints".into()));
                }
                let (a, b) = (self.start.ln(), self.end.ln());
                Ok((0..self.count).map(|i| (a + (b - a) * i as f64 / n).exp()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub r_tr: Option<f64>,
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            h: None,
            r_tr: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub graph: GraphSource,
    pub p: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default, rename = "W")]
    pub w: CoefficientSpec,
    #[serde(default)]
    pub rho: CoefficientSpec,
    #[serde(default)]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub m_star: Option<usize>,
    /// Starting guess for continuation scenarios.
    #[serde(default)]
    pub branch: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
}

/// Scenarios that need every `λ` on the grid to be positive.
const POSITIVE_LAMBDA: [&str; 5] = ["soliton", "four-star-near", "four-star-far", "localized", "nls"];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 2.0) {
            return Err(Error::InvalidArgument(format!("p must exceed 2, got {}", self.p)));
        }
        if !(self.solver.tol > 0.0) || self.solver.h.is_some_and(|h| !(h > 0.0)) || self.solver.r_tr.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if let Some(grid) = &self.lambda_grid {
            let values = grid.values()?;
            if POSITIVE_LAMBDA.contains(&self.scenario.as_str()) && values.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "scenario '{}' needs a positive lambda grid",
                    self.scenario
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;

    #[test]
    fn reserved_keys_and_precedence() {
        let g = tadpole(2.0, 2).unwrap();
        let spec: CoefficientSpec = serde_json::from_str(
            r#"{"*": {"const": 1.0}, "halflines": {"const": 0.0}, "h2": {"samples": [0.0, 1.0]}}"#,
        )
        .unwrap();
        let c = resolve_coefficient(&g, &spec, 7.0, 10.0).unwrap();
        assert_eq!(c.eval(EdgeId(0), 0.3), 1.0);
        assert_eq!(c.eval(EdgeId(1), 3.0), 0.0);
        assert_eq!(c.eval(EdgeId(2), 5.0), 0.5);
        let empty = resolve_coefficient(&g, &CoefficientSpec::new(), 7.0, 10.0).unwrap();
        assert_eq!(empty.eval(EdgeId(1), 0.0), 7.0);
    }

    #[test]
    fn unknown_key_rejected() {
        let g = three_bridge();
        assert!(parse_coefficient(&g, r#"{"e9": {"const": 1}}"#, 0.0).is_err());
        assert!(parse_coefficient(&g, r#"{"core": {"linear": 1}}"#, 0.0).is_err());
        assert_eq!(parse_coefficient(&g, "2.5", 0.0).unwrap(), Coefficient::constant(&g, 2.5));
    }

    #[test]
    fn config_round_trip_and_grid() {
        let text = r#"{
            "scenario": "nls",
            "graph": {"kind": "builtin", "name": "line"},
            "p": 4,
            "lambda_grid": {"kind": "log", "start": 100, "end": 10000, "count": 3},
            "output": "out"
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let v = c.lambda_grid.unwrap().values().unwrap();
        assert!((v[1] - 1000.0).abs() < 1e-9);
        assert_eq!(c.graph.load().unwrap().edge_count(), 2);
        let bad = text.replace("\"start\": 100", "\"start\": -1").replace("\"log\"", "\"linear\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }
}
