use serde::{Deserialize, Serialize};

use super::MetricGraph;
use crate::error::{Error, Result};

/// Length field of an edge record: a positive number or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthDoc {
    Finite(f64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub tail: String,
    pub head: Option<String>,
    pub length: LengthDoc,
}

/// JSON graph description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

impl GraphDocument {
    pub fn from_graph(g: &MetricGraph) -> Self {
        Self {
            vertices: g.vertices().map(|v| g.vertex_name(v).to_string()).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    id: e.name.clone(),
                    tail: g.vertex_name(e.tail).to_string(),
                    head: e.head.map(|h| g.vertex_name(h).to_string()),
                    length: if e.length.is_finite() {
                        LengthDoc::Finite(e.length)
                    } else {
                        LengthDoc::Word("inf".into())
                    },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph document serializes")
    }

    pub fn into_graph(self) -> Result<MetricGraph> {
        let mut b = MetricGraph::builder();
        for v in &self.vertices {
            b = b.vertex(v);
        }
        for e in &self.edges {
            let length = match &e.length {
                LengthDoc::Finite(x) => *x,
                LengthDoc::Word(w) if w == "inf" => f64::INFINITY,
                LengthDoc::Word(w) => {
                    return Err(Error::InvalidGraph(format!(
                        "edge '{}': length must be a number or \"inf\", got \"{w}\"",
                        e.id
                    )))
                }
            };
            b = match (&e.head, length.is_finite()) {
                (Some(h), true) => b.edge(&e.id, &e.tail, h, length),
                (None, false) => b.half_line(&e.id, &e.tail),
                (Some(_), false) => {
                    return Err(Error::InvalidGraph(format!(
                        "half-line '{}' has two vertices",
                        e.id
                    )))
                }
                (None, true) => {
                    return Err(Error::InvalidGraph(format!(
                        "edge '{}' has no head but finite length {length}",
                        e.id
                    )))
                }
            };
        }
        b.build()
    }
}

/// Parse and validate a JSON graph description.
pub fn load_graph(text: &str) -> Result<MetricGraph> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_graph()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{star_graph, tadpole, three_bridge, EdgeId, GraphPoint};

    #[test]
    fn three_bridge_document() {
        let text = r#"{"vertices": ["vL", "vR"], "edges": [
            {"id": "e1", "tail": "vL", "head": "vR", "length": 1},
            {"id": "e2", "tail": "vL", "head": "vR", "length": 1.0},
            {"id": "e3", "tail": "vL", "head": "vR", "length": 1.0}]}"#;
        let g = load_graph(text).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 3));
        assert_eq!(g, three_bridge());
    }

    #[test]
    fn path_graph_document() {
        let text = r#"{"vertices": ["a", "b"], "edges": [{"id": "e", "tail": "a", "head": "b", "length": 1.0}]}"#;
        let g = load_graph(text).unwrap();
        let a = GraphPoint::new(&g, EdgeId(0), 0.0).unwrap();
        let b = GraphPoint::new(&g, EdgeId(0), 1.0).unwrap();
        assert_eq!(crate::graph::distance(&g, a, b), 1.0);
    }

    #[test]
    fn tadpole_document() {
        let text = r#"{"vertices": ["v"], "edges": [
            {"id": "loop", "tail": "v", "head": "v", "length": 2},
            {"id": "h", "tail": "v", "head": null, "length": "inf"}]}"#;
        let g = load_graph(text).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 2));
        assert_eq!(g.half_lines().count(), 1);
    }

    #[test]
    fn parse_error_reports_position() {
        let err = load_graph("{\n  \"vertices\": [\"a\",\n  oops").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn validation_errors_name_the_invariant() {
        let zero = r#"{"vertices": ["a","b"], "edges": [{"id": "e", "tail": "a", "head": "b", "length": 0}]}"#;
        assert!(load_graph(zero).unwrap_err().to_string().contains("positive length"));
        let two = r#"{"vertices": ["a","b"], "edges": [{"id": "e", "tail": "a", "head": "b", "length": "inf"}]}"#;
        assert!(load_graph(two).unwrap_err().to_string().contains("two vertices"));
        let split = r#"{"vertices": ["a","b"], "edges": []}"#;
        assert!(load_graph(split).unwrap_err().to_string().contains("disconnected"));
    }

    #[test]
    fn round_trip_is_identity() {
        for g in [three_bridge(), tadpole(2.0, 2).unwrap(), star_graph(3).unwrap()] {
            let doc = GraphDocument::from_graph(&g);
            let text = doc.to_json();
            let back = load_graph(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(GraphDocument::from_graph(&back), doc);
        }
    }
}
