//! Families of solutions indexed by increasing `λ`.

use rayon::prelude::*;
use serde::Serialize;

use super::maxima::{find_local_maxima, LocalMax};
use crate::error::{Error, Result};
use crate::graph::{DistanceField, MetricGraph};
use crate::nls::{build_four_star_family, build_line_soliton, FourStarVariant, SolutionCandidate};

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub lambda: f64,
    pub candidate: SolutionCandidate,
    pub maxima: Vec<LocalMax>,
    /// `R^i`: `|u(x^i)|` is the maximum of `|u|` on the ball of radius
    /// `R^i λ^{-1/2}` around `x^i` (infinite for a global maximum).
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BlowupFamily {
    pub graph: MetricGraph,
    pub p: f64,
    pub scenario: String,
    pub members: Vec<FamilyMember>,
}

fn radii(g: &MetricGraph, c: &SolutionCandidate, maxima: &[LocalMax]) -> Vec<f64> {
    let k = c.lambda().max(0.0).sqrt();
    maxima
        .iter()
        .map(|m| {
            let level = m.value.abs() * (1.0 + 1e-9);
            let field = DistanceField::new(g, &[m.point]);
            let mut best = f64::INFINITY;
            for e in g.edges() {
                let s = c.u().edge(e.id);
                for (j, v) in s.u.iter().enumerate() {
                    if v.abs() > level {
                        best = best.min(field.on_edge(g, e.id, s.grid.x(j)));
                    }
                }
            }
            k * best
        })
        .collect()
}

impl BlowupFamily {
    /// Members must have strictly increasing `λ`.
    pub fn new(
        graph: MetricGraph,
        p: f64,
        scenario: &str,
        members: Vec<(f64, SolutionCandidate)>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Empty("family"));
        }
        if members.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("family lambdas must increase strictly".into()));
        }
        let members = members
            .into_iter()
            .map(|(lambda, candidate)| {
                let maxima = find_local_maxima(&graph, candidate.u());
                let radii = radii(&graph, &candidate, &maxima);
                FamilyMember {
                    lambda,
                    candidate,
                    maxima,
                    radii,
                }
            })
            .collect();
        Ok(Self {
            graph,
            p,
            scenario: scenario.to_string(),
            members,
        })
    }

    /// Solitons on `star_graph(2)`.
    pub fn soliton_family(p: f64, lambdas: &[f64]) -> Result<Self> {
        let built: Vec<_> = lambdas
            .par_iter()
            .map(|&l| build_line_soliton(p, l))
            .collect::<Result<_>>()?;
        let graph = built.first().ok_or(Error::Empty("lambda grid"))?.graph.clone();
        let members = lambdas
            .iter()
            .zip(built)
            .map(|(&l, b)| (l, b.candidate))
            .collect();
        Self::new(graph, p, "soliton", members)
    }

    /// Soliton pieces on the four-star.
    pub fn four_star_family(p: f64, lambdas: &[f64], variant: FourStarVariant) -> Result<Self> {
        let built: Vec<_> = lambdas
            .par_iter()
            .map(|&l| build_four_star_family(p, l, variant))
            .collect::<Result<_>>()?;
        let graph = built.first().ok_or(Error::Empty("lambda grid"))?.graph.clone();
        let members = lambdas
            .iter()
            .zip(built)
            .map(|(&l, b)| (l, b.candidate))
            .collect();
        let tag = match variant {
            FourStarVariant::Near => "four-star-near",
            FourStarVariant::Far => "four-star-far",
        };
        Self::new(graph, p, tag, members)
    }

    /// `λ^{1/2}` times the smallest distance between two maxima, per member
    /// (`None` with fewer than two maxima).
    pub fn separation(&self) -> Vec<Option<f64>> {
        self.members
            .iter()
            .map(|m| {
                let pts: Vec<_> = m.maxima.iter().map(|x| x.point).collect();
                let mut best: Option<f64> = None;
                for (i, a) in pts.iter().enumerate() {
                    let field = DistanceField::new(&self.graph, &[*a]);
                    for b in &pts[i + 1..] {
                        let d = field.at(&self.graph, *b);
                        best = Some(best.map_or(d, |x: f64| x.min(d)));
                    }
                }
                best.map(|d| m.lambda.sqrt() * d)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassScalingRow {
    pub lambda: f64,
    /// `∫ |u|^q`.
    pub integral: f64,
    /// `λ^{1/2 - q/(p-2)} ∫ |u|^q`.
    pub scaled: f64,
}

/// Rescaled `L^q` masses along the family.
pub fn mass_scaling_curve(family: &BlowupFamily, q: f64) -> Result<Vec<MassScalingRow>> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("q must be >= 1, got {q}")));
    }
    let exponent = 0.5 - q / (family.p - 2.0);
    Ok(family
        .members
        .par_iter()
        .map(|m| {
            let integral = m.candidate.u().integral_pow(q);
            MassScalingRow {
                lambda: m.lambda,
                integral,
                scaled: m.lambda.powf(exponent) * integral,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::soliton_mass;

    fn spread(rows: &[MassScalingRow]) -> f64 {
        let lo = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
        (hi - lo) / hi
    }

    #[test]
    fn soliton_scaling_is_exact() {
        let lambdas = [1e2, 1e3, 1e4];
        let fam = BlowupFamily::soliton_family(4.0, &lambdas).unwrap();
        let rows = mass_scaling_curve(&fam, 2.0).unwrap();
        assert!(spread(&rows) < 1e-6, "{rows:?}");
        let unit = soliton_mass(4.0, 1.0, 2.0).unwrap();
        assert!((rows[0].scaled - unit).abs() < 1e-6 * unit);
        for m in &fam.members {
            assert_eq!(m.maxima.len(), 1);
            assert!(m.radii[0].is_infinite());
        }
    }

    #[test]
    fn raw_mass_constant_at_p6() {
        let fam = BlowupFamily::soliton_family(6.0, &[1e2, 1e3, 1e4]).unwrap();
        let rows = mass_scaling_curve(&fam, 2.0).unwrap();
        let first = rows[0].integral;
        for r in &rows {
            assert!((r.integral - first).abs() < 1e-6 * first);
        }
    }

    #[test]
    fn four_star_scaling_and_separation() {
        let lambdas = [1e2, 1e3, 1e4];
        for q in [1.0, 2.0, 3.5] {
            let fam = BlowupFamily::four_star_family(4.0, &lambdas, FourStarVariant::Near).unwrap();
            assert!(spread(&mass_scaling_curve(&fam, q).unwrap()) < 1e-6);
        }
        let far = BlowupFamily::four_star_family(4.0, &lambdas, FourStarVariant::Far).unwrap();
        let sep: Vec<f64> = far.separation().into_iter().map(Option::unwrap).collect();
        assert!(sep.windows(2).all(|w| w[1] > w[0]), "{sep:?}");
        assert!((sep[0] - 20.0).abs() < 1e-6);
    }

    #[test]
    fn lambdas_must_increase() {
        assert!(BlowupFamily::soliton_family(4.0, &[2.0, 1.0]).is_err());
        assert!(BlowupFamily::soliton_family(4.0, &[]).is_err());
    }
}
