//! CSV tables: solutions, spectra, eigenvectors and ODE trajectories.
//!
//! Numbers are written in shortest round-trip exponent form, so reading a
//! file back gives bitwise-equal doubles.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph};
use crate::grid::{EdgeGrid, EdgeSamples, GridFunction, Tail};
use crate::ode::Trajectory;
use crate::spectral::Spectrum;

pub const SOLUTION_HEADER: [&str; 6] = ["edge_id", "kind", "s", "u", "du", "rate"];

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Schema(e.to_string())
}

fn parse_num(field: &str, row: usize, col: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Schema(format!("row {row}: column '{col}' is not a number: '{field}'")))
}

/// One row per grid sample (`kind = sample`) and one per half-line tail
/// (`kind = tail`: `s` is the truncation point, `u` the amplitude, `rate` the
/// decay rate).
pub fn write_solution<W: Write>(g: &MetricGraph, u: &GridFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SOLUTION_HEADER).map_err(csv_err)?;
    for e in g.edges() {
        let s = u.edge(e.id);
        for j in 0..s.grid.n {
            w.write_record([
                e.name.as_str(),
                "sample",
                &num(s.grid.x(j)),
                &num(s.u[j]),
                &num(s.du[j]),
                "",
            ])
            .map_err(csv_err)?;
        }
        if let Some(t) = u.tail(e.id) {
            w.write_record([
                e.name.as_str(),
                "tail",
                &num(s.grid.span),
                &num(t.amplitude),
                &num(-t.rate * t.amplitude),
                &num(t.rate),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn solution_to_string(g: &MetricGraph, u: &GridFunction) -> Result<String> {
    let mut buf = Vec::new();
    write_solution(g, u, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Read a solution written by [`write_solution`]. Every edge of `g` needs a
/// uniform sample grid starting at 0; bounded edges must be covered exactly.
pub fn read_solution<R: Read>(g: &MetricGraph, input: R) -> Result<GridFunction> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != SOLUTION_HEADER {
        return Err(Error::Schema(format!(
            "expected header {}, got {}",
            SOLUTION_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples: HashMap<String, Vec<(f64, f64, f64)>> = HashMap::new();
    let mut tails: HashMap<String, (f64, Tail)> = HashMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = i + 2;
        let name = rec[0].to_string();
        if g.edge_by_name(&name).is_none() {
            return Err(Error::Schema(format!("row {row}: unknown edge '{name}'")));
        }
        let s = parse_num(&rec[2], row, "s")?;
        let u = parse_num(&rec[3], row, "u")?;
        match &rec[1] {
            "sample" => {
                let du = parse_num(&rec[4], row, "du")?;
                samples.entry(name).or_default().push((s, u, du));
            }
            "tail" => {
                let rate = parse_num(&rec[5], row, "rate")?;
                tails.insert(name, (s, Tail { amplitude: u, rate }));
            }
            other => return Err(Error::Schema(format!("row {row}: unknown kind '{other}'"))),
        }
    }
    let mut edges = Vec::with_capacity(g.edge_count());
    let mut tail_slots = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let rows = samples
            .remove(&e.name)
            .ok_or_else(|| Error::Schema(format!("no samples for edge '{}'", e.name)))?;
        if rows.len() < 2 || rows[0].0 != 0.0 {
            return Err(Error::Schema(format!(
                "edge '{}' needs at least two samples starting at s = 0",
                e.name
            )));
        }
        let span = rows[rows.len() - 1].0;
        let grid = EdgeGrid::new(span, rows.len())?;
        for (j, row) in rows.iter().enumerate() {
            if (row.0 - grid.x(j)).abs() > 1e-12 * span {
                return Err(Error::Schema(format!(
                    "edge '{}': samples are not on a uniform grid (s = {} at index {j})",
                    e.name, row.0
                )));
            }
        }
        let tail = match tails.remove(&e.name) {
            Some((s, t)) if s == span => Some(t),
            Some((s, _)) => {
                return Err(Error::Schema(format!(
                    "edge '{}': tail starts at {s}, samples end at {span}",
                    e.name
                )))
            }
            None => None,
        };
        let (u, du) = rows.iter().map(|r| (r.1, r.2)).unzip();
        edges.push(EdgeSamples::new(grid, u, du)?);
        tail_slots.push(tail);
    }
    let (u, _) = GridFunction::assemble(g, edges, tail_slots).map_err(|e| Error::Schema(e.to_string()))?;
    Ok(u)
}

pub fn solution_from_str(g: &MetricGraph, text: &str) -> Result<GridFunction> {
    read_solution(g, text.as_bytes())
}

/// `index,eigenvalue,cluster`.
pub fn write_spectrum<W: Write>(s: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue", "cluster"]).map_err(csv_err)?;
    for (i, (v, c)) in s.values.iter().zip(&s.clusters).enumerate() {
        w.write_record([(i + 1).to_string(), num(*v), c.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `edge_id,s,v1,v2,...` at the mesh nodes.
pub fn write_eigenvectors<W: Write>(g: &MetricGraph, s: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["edge_id".to_string(), "s".to_string()];
    header.extend((1..=s.vectors.len()).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for e in g.edges() {
        let cols: Vec<Vec<(f64, f64)>> = (0..s.vectors.len()).map(|i| s.edge_samples(i, e.id)).collect();
        let n = cols.first().map_or(0, Vec::len);
        for j in 0..n {
            let mut rec = vec![e.name.clone(), num(cols[0][j].0)];
            rec.extend(cols.iter().map(|c| num(c[j].1)));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `x,u,du` at the integrator nodes.
pub fn write_trajectory<W: Write>(t: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "u", "du"]).map_err(csv_err)?;
    for ((x, u), du) in t.grid().iter().zip(t.values()).zip(t.derivatives()) {
        w.write_record([num(*x), num(*u), num(*du)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Write rows of serializable records with a header.
pub fn write_records<W: Write, T: serde::Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Edge lookup by name, as a schema error.
pub fn edge_named(g: &MetricGraph, name: &str) -> Result<EdgeId> {
    g.edge_by_name(name)
        .ok_or_else(|| Error::Schema(format!("unknown edge '{name}'")))
}
