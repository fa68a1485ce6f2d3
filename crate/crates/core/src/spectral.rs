//! Spectrum of `v ↦ -v'' + W v` with Kirchhoff conditions on compact graphs.

use serde::Serialize;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::fem::{FemMesh, Pencil, SymMatrix};
use crate::graph::{EdgeId, MetricGraph};

/// Stiffness, mass and potential matrices on a shared dof map.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub mesh: FemMesh,
    pub k: SymMatrix,
    pub m: SymMatrix,
    pub p: SymMatrix,
    pub h: f64,
}

impl DiscreteOperator {
    /// `K + P`.
    pub fn operator(&self) -> SymMatrix {
        self.k.add_scaled(1.0, &self.p)
    }

    pub fn pencil(&self) -> Result<Pencil> {
        Pencil::new(&self.mesh, &self.operator(), &self.m)
    }
}

/// `h = 1e-3` times the longest edge.
pub fn default_h(g: &MetricGraph) -> f64 {
    1e-3 * g.max_bounded_length().unwrap_or(1.0)
}

pub fn assemble(g: &MetricGraph, w: &Coefficient, h: f64) -> Result<DiscreteOperator> {
    if !g.is_compact() {
        return Err(Error::NonCompact);
    }
    w.validate(g, "W")?;
    let mesh = FemMesh::new(g, h, None)?;
    let (k, m) = (mesh.stiffness(), mesh.mass());
    let p = mesh.potential(|e, s| w.eval(e, s));
    Ok(DiscreteOperator { mesh, k, m, p, h })
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// `M`-orthonormal nodal vectors, one per value.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    /// Equal ids mark values within `1e-8 (1 + |λ|)` of each other.
    pub clusters: Vec<usize>,
    pub h: f64,
    #[serde(skip)]
    pub mesh: FemMesh,
}

impl Spectrum {
    /// Samples `(s, v(s))` of eigenvector `i` along edge `e`.
    pub fn edge_samples(&self, i: usize, e: EdgeId) -> Vec<(f64, f64)> {
        let em = self.mesh.edge(e);
        self.mesh
            .edge_values(&self.vectors[i], e)
            .into_iter()
            .enumerate()
            .map(|(j, v)| (em.x(j), v))
            .collect()
    }
}

pub fn cluster_ids(values: &[f64]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(values.len());
    let mut id = 0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 && (v - values[i - 1]).abs() > 1e-8 * (1.0 + v.abs()) {
            id += 1;
        }
        ids.push(id);
    }
    ids
}

/// The `count` smallest eigenvalues with eigenvectors.
pub fn eigenvalues(g: &MetricGraph, w: &Coefficient, count: usize, h: f64) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let op = assemble(g, w, h)?;
    let pencil = op.pencil()?;
    let values = pencil.smallest_eigenvalues(count)?;
    let vectors = pencil.eigenvectors(&op.m, &values)?;
    Ok(Spectrum {
        clusters: cluster_ids(&values),
        values,
        vectors,
        h,
        mesh: op.mesh,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// `-λ_{m*+1}`.
    pub value: f64,
    /// `-λ_1`, the threshold for ground states.
    pub lambda_one: f64,
    pub m_star: usize,
    pub h: f64,
}

/// `-λ_{m*+1}(-v'' + W v)` at mesh size `h`.
pub fn lambda_threshold(g: &MetricGraph, w: &Coefficient, m_star: usize, h: f64) -> Result<Threshold> {
    let op = assemble(g, w, h)?;
    let values = op.pencil()?.smallest_eigenvalues(m_star + 1)?;
    Ok(Threshold {
        value: -values[m_star],
        lambda_one: -values[0],
        m_star,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{circle, interval, three_bridge, EndRole};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn interval_neumann() {
        let g = interval(3.0).unwrap();
        let s = eigenvalues(&g, &Coefficient::constant(&g, 0.0), 5, 1e-3).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            let exact = (k as f64 * PI / 3.0).powi(2);
            assert!((v - exact).abs() <= 1e-5 * exact.max(1.0), "{k} {v}");
        }
        assert_eq!(s.clusters, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn circle_doubles() {
        let l = 2.5;
        let g = circle(l).unwrap();
        let s = eigenvalues(&g, &Coefficient::constant(&g, 0.0), 5, 1e-3).unwrap();
        assert!(s.values[0].abs() < 1e-9);
        for k in 1..=2 {
            let exact = (2.0 * PI * k as f64 / l).powi(2);
            for j in [2 * k - 1, 2 * k] {
                assert!((s.values[j] - exact).abs() < 1e-5 * exact);
            }
            assert_eq!(s.clusters[2 * k - 1], s.clusters[2 * k]);
        }
    }

    #[test]
    fn three_bridge_multiplicities_and_order() {
        let g = three_bridge();
        let w = Coefficient::constant(&g, 0.0);
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&h| {
                let s = eigenvalues(&g, &w, 7, h).unwrap();
                assert_eq!(s.clusters, vec![0, 1, 1, 1, 2, 2, 2]);
                (s.values[1] - PI * PI) / (PI * PI)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((ratio - 4.0).abs() < 0.8, "{ratio}");
    }

    #[test]
    fn constant_potential_shifts_threshold() {
        let g = three_bridge();
        let t0 = lambda_threshold(&g, &Coefficient::constant(&g, 0.0), 1, 5e-3).unwrap();
        let t1 = lambda_threshold(&g, &Coefficient::constant(&g, 2.5), 1, 5e-3).unwrap();
        assert!((t1.value - (t0.value - 2.5)).abs() < 1e-9);
        assert!((t0.value + PI * PI).abs() < 1e-3);
        assert!(t0.lambda_one.abs() < 1e-9);
    }

    #[test]
    fn eigenpair_residual_and_kirchhoff() {
        let g = three_bridge();
        let h = 0.01;
        let w = Coefficient::per_edge(&[0.0, 1.0, 3.0]);
        let op = assemble(&g, &w, h).unwrap();
        let s = eigenvalues(&g, &w, 4, h).unwrap();
        let a = op.operator();
        for (lam, v) in s.values.iter().zip(&s.vectors) {
            let mv = op.m.matvec(v);
            let r: f64 = a.matvec(v).iter().zip(&mv).map(|(x, y)| (x - lam * y).powi(2)).sum::<f64>().sqrt();
            let nm: f64 = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(r <= 1e-8 * nm, "{r} {nm}");
            let norm = op.m.quad(v).sqrt();
            for vert in g.vertices() {
                let flux: f64 = g
                    .incident(vert)
                    .iter()
                    .map(|&(e, role)| {
                        let em = op.mesh.edge(e);
                        let vals = op.mesh.edge_values(v, e);
                        let n = vals.len();
                        match role {
                            EndRole::Tail => (vals[1] - vals[0]) / em.h(),
                            EndRole::Head => (vals[n - 2] - vals[n - 1]) / em.h(),
                        }
                    })
                    .sum();
                assert!(flux.abs() <= 10.0 * h * norm * (1.0 + lam.abs()), "{flux}");
            }
        }
    }

    #[test]
    fn rayleigh_quotients_above_ground_state() {
        let g = three_bridge();
        let w = Coefficient::per_edge(&[0.5, -1.0, 2.0]);
        let op = assemble(&g, &w, 0.02).unwrap();
        let l1 = op.pencil().unwrap().smallest_eigenvalues(1).unwrap()[0];
        let a = op.operator();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: Vec<f64> = (0..op.mesh.dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(a.quad(&x) / op.m.quad(&x) >= l1 - 1e-12);
        }
    }

    #[test]
    fn rejects_half_lines() {
        let g = crate::graph::star_graph(2).unwrap();
        assert!(matches!(
            eigenvalues(&g, &Coefficient::constant(&g, 0.0), 1, 0.1),
            Err(Error::NonCompact)
        ));
    }
}
