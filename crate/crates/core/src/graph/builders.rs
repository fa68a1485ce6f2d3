use super::MetricGraph;
use crate::error::{Error, Result};

/// `k` half-lines glued at a single vertex `o`. `star_graph(2)` is the real line.
pub fn star_graph(k: usize) -> Result<MetricGraph> {
    if k == 0 {
        return Err(Error::InvalidArgument("star graph needs k >= 1".into()));
    }
    let mut b = MetricGraph::builder().vertex("o");
    for i in 1..=k {
        b = b.half_line(&format!("e{i}"), "o");
    }
    b.build()
}

/// Two vertices joined by three parallel edges of unit length.
pub fn three_bridge() -> MetricGraph {
    MetricGraph::builder()
        .vertex("vL")
        .vertex("vR")
        .edge("e1", "vL", "vR", 1.0)
        .edge("e2", "vL", "vR", 1.0)
        .edge("e3", "vL", "vR", 1.0)
        .build()
        .expect("three-bridge is valid")
}

/// A loop of length `loop_len` with `n_halflines` half-lines at its vertex.
pub fn tadpole(loop_len: f64, n_halflines: usize) -> Result<MetricGraph> {
    if !(loop_len > 0.0 && loop_len.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "loop length must be positive, got {loop_len}"
        )));
    }
    let mut b = MetricGraph::builder().vertex("v").edge("loop", "v", "v", loop_len);
    for i in 1..=n_halflines {
        b = b.half_line(&format!("h{i}"), "v");
    }
    b.build()
}

pub fn four_star() -> MetricGraph {
    star_graph(4).expect("k = 4 is valid")
}

/// The segment `[0, length]` with two degree-one vertices `a` and `b`.
pub fn interval(length: f64) -> Result<MetricGraph> {
    MetricGraph::builder()
        .vertex("a")
        .vertex("b")
        .edge("e", "a", "b", length)
        .build()
}

/// A single loop of the given length.
pub fn circle(length: f64) -> Result<MetricGraph> {
    MetricGraph::builder()
        .vertex("v")
        .edge("loop", "v", "v", length)
        .build()
}
