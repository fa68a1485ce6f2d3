//! Empirical oscillation threshold: the smallest initial radius `Δ` such that
//! every solution of `-u'' + W u = ρ |u|^{p-2} u` on `[0, ℓ]` starting with
//! `u0² + u0'² >= Δ` has at least `k` zeros, for all constants
//! `W ∈ [-W_M, W_M]`, `ρ ∈ [ρ_m, ρ_M]`.
//!
//! The estimate scans 256 initial angles per radius and a grid of coefficient
//! pairs, then bisects on the radius. It is a numerical oracle, not a proof.

use rayon::prelude::*;
use serde::Serialize;

use super::{count_zeros, integrate, integrate_until, OdeState, Tolerance};
use crate::error::{Error, Result};

const ANGLES: usize = 256;
const COEFF_GRID: usize = 3;
const CEILING: f64 = 1e6;
const SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HartmanQuery {
    pub p: f64,
    pub ell: f64,
    pub w_max: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub k: usize,
}

impl HartmanQuery {
    fn validate(&self) -> Result<()> {
        if !(self.p > 2.0
            && self.ell > 0.0
            && self.w_max > 0.0
            && self.rho_min > 0.0
            && self.rho_min <= self.rho_max
            && self.k >= 1)
        {
            return Err(Error::InvalidArgument(format!("invalid oscillation query {self:?}")));
        }
        Ok(())
    }

    fn coefficient_pairs(&self) -> Vec<(f64, f64)> {
        let lin = |lo: f64, hi: f64| -> Vec<f64> {
            if lo == hi {
                vec![lo]
            } else {
                (0..COEFF_GRID)
                    .map(|i| lo + (hi - lo) * i as f64 / (COEFF_GRID - 1) as f64)
                    .collect()
            }
        };
        let ws = lin(-self.w_max, self.w_max);
        let rs = lin(self.rho_min, self.rho_max);
        ws.iter().flat_map(|&w| rs.iter().map(move |&r| (w, r))).collect()
    }

    /// Zeros on `[0, ℓ]` of the solution with the given data.
    pub fn zeros(&self, w: f64, rho: f64, init: OdeState) -> Result<usize> {
        let p = self.p;
        let tol = Tolerance::new(1e-9, 1e-12)?;
        let traj = integrate(
            |_, u| w * u - rho * u.abs().powf(p - 2.0) * u,
            0.0,
            init,
            self.ell,
            tol,
        )?;
        Ok(count_zeros(&traj))
    }

    /// Zero count capped at `k`: integration stops once enough sign changes
    /// have been seen at the step nodes.
    fn zeros_capped(&self, w: f64, rho: f64, init: OdeState) -> Result<usize> {
        let p = self.p;
        let tol = Tolerance::new(1e-9, 1e-12)?;
        let mut prev = init.u;
        let mut changes = 0usize;
        let needed = self.k + 1;
        let traj = integrate_until(
            |_, u| w * u - rho * u.abs().powf(p - 2.0) * u,
            0.0,
            init,
            self.ell,
            tol,
            |_, st| {
                if st.u * prev < 0.0 {
                    changes += 1;
                }
                if st.u != 0.0 {
                    prev = st.u;
                }
                changes >= needed
            },
        )?;
        Ok(count_zeros(&traj).min(self.k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HartmanEstimate {
    /// Threshold including the safety factor.
    pub radius: f64,
    /// Transition radius found by bisection.
    pub raw_radius: f64,
    /// The search hit its ceiling; `radius` is then only an upper bound.
    pub ceiling_reached: bool,
}

/// Fewest zeros over all scanned angles and coefficient pairs at radius `r`
/// (radius meaning `sqrt(u0² + u0'²)`).
pub fn min_zero_count(q: &HartmanQuery, r: f64) -> Result<usize> {
    let pairs = q.coefficient_pairs();
    let jobs: Vec<(f64, f64, usize)> = pairs
        .iter()
        .flat_map(|&(w, rho)| (0..ANGLES).map(move |a| (w, rho, a)))
        .collect();
    jobs.par_iter()
        .map(|&(w, rho, a)| {
            let theta = 2.0 * std::f64::consts::PI * a as f64 / ANGLES as f64;
            q.zeros_capped(w, rho, OdeState::new(r * theta.cos(), r * theta.sin()))
        })
        .try_reduce(|| usize::MAX, |a, b| Ok(a.min(b)))
}

pub fn hartman_threshold(q: &HartmanQuery) -> Result<HartmanEstimate> {
    q.validate()?;
    let ok = |r: f64| -> Result<bool> { Ok(min_zero_count(q, r)? >= q.k) };
    let mut lo;
    let mut hi;
    if ok(1.0)? {
        hi = 1.0;
        lo = 0.5;
        while ok(lo)? {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-8 {
                return Ok(HartmanEstimate {
                    radius: hi * SAFETY,
                    raw_radius: hi,
                    ceiling_reached: false,
                });
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        loop {
            if hi > CEILING {
                return Ok(HartmanEstimate {
                    radius: CEILING,
                    raw_radius: CEILING,
                    ceiling_reached: true,
                });
            }
            if ok(hi)? {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    }
    loop {
        while hi / lo > 1.0 + 1e-3 {
            let mid = (lo * hi).sqrt();
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // the zero count need not be monotone in r; look for failures above
        let mut failure = None;
        for j in 1..=12 {
            let r = hi * 16f64.powf(j as f64 / 12.0);
            if !ok(r)? {
                failure = Some(r);
            }
        }
        match failure {
            None => break,
            Some(r) => {
                lo = r;
                hi = r * 2.0;
                while !ok(hi)? {
                    lo = hi;
                    hi *= 2.0;
                    if hi > CEILING {
                        return Ok(HartmanEstimate {
                            radius: CEILING,
                            raw_radius: CEILING,
                            ceiling_reached: true,
                        });
                    }
                }
            }
        }
    }
    Ok(HartmanEstimate {
        radius: hi * SAFETY,
        raw_radius: hi,
        ceiling_reached: false,
    })
}
