//! Sign-changing periodic solutions of `-u'' + λu = |u|^{p-2} u` with
//! `u(0) = 0`, `u'(0) > 0`.

use super::{integrate, integrate_until, OdeState, Tolerance, Trajectory};
use crate::error::{Error, Result};
use crate::util::illinois;

/// Largest admissible period: `2π/√(-λ)` for `λ < 0`, infinite otherwise.
pub fn periodic_max_length(lambda: f64) -> f64 {
    if lambda < 0.0 {
        2.0 * std::f64::consts::PI / (-lambda).sqrt()
    } else {
        f64::INFINITY
    }
}

/// An `ℓ`-periodic solution vanishing at `0`, `ℓ/2` and `ℓ`, positive on
/// `(0, ℓ/2)` and odd about `ℓ/2`.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    pub p: f64,
    pub lambda: f64,
    pub ell: f64,
    /// `u'(0)`.
    pub slope: f64,
    half: Trajectory,
}

impl PeriodicSolution {
    /// `(u, u')` at any real `x`.
    pub fn eval(&self, x: f64) -> OdeState {
        let x = x.rem_euclid(self.ell);
        let half = 0.5 * self.ell;
        if x <= half {
            self.half.eval(x)
        } else {
            let s = self.half.eval(self.ell - x);
            OdeState::new(-s.u, s.du)
        }
    }

    /// Maximum value, attained at `ℓ/4`.
    pub fn amplitude(&self) -> f64 {
        self.eval(0.25 * self.ell).u
    }

    /// The solution on `[0, ℓ/2]`.
    pub fn half_period(&self) -> &Trajectory {
        &self.half
    }

    /// The solution on `[0, ℓ]`.
    pub fn full_period(&self) -> Trajectory {
        self.half.reflect_odd()
    }

    /// Equation right-hand side for this solution's parameters.
    pub fn accel(&self, u: f64) -> f64 {
        self.lambda * u - u.abs().powf(self.p - 2.0) * u
    }
}

/// Find the periodic solution of period `ell` by adjusting `u'(0)` until the
/// first return to zero happens at `ell/2`.
pub fn periodic_solution(p: f64, lambda: f64, ell: f64) -> Result<PeriodicSolution> {
    if !(p > 2.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 2, got {p}")));
    }
    let ell_max = periodic_max_length(lambda);
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {ell}")));
    }
    if ell >= ell_max {
        return Err(Error::NoSolution(format!(
            "period {ell} is not below the maximal period {ell_max}"
        )));
    }
    let tol = Tolerance::default();
    let accel = |_: f64, u: f64| lambda * u - u.abs().powf(p - 2.0) * u;
    let half = 0.5 * ell;
    // true when the first zero after 0 comes before ell/2
    let returns_early = |s: f64| -> Result<bool> {
        let t = integrate_until(accel, 0.0, OdeState::new(0.0, s), half, tol, |_, st| st.u < 0.0)?;
        Ok(t.last().u < 0.0)
    };

    let mut lo = 1.0;
    let mut hi = 1.0;
    if returns_early(1.0)? {
        loop {
            lo *= 0.5;
            if lo < 1e-200 {
                return Err(Error::Bracket("slope underflow while bracketing".into()));
            }
            if !returns_early(lo)? {
                break;
            }
            hi = lo;
        }
    } else {
        loop {
            hi *= 2.0;
            if hi > 1e200 {
                return Err(Error::Bracket("slope overflow while bracketing".into()));
            }
            if returns_early(hi)? {
                break;
            }
            lo = hi;
        }
    }
    // narrow geometrically so that at most one zero lies in (0, ell/2]
    while hi / lo > 1.0 + 1e-4 {
        let mid = (lo * hi).sqrt();
        if returns_early(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let endpoint = |s: f64| {
        integrate(accel, 0.0, OdeState::new(0.0, s), half, tol)
            .map(|t| t.last().u)
            .unwrap_or(f64::NAN)
    };
    let slope = illinois(endpoint, lo, hi, 1e-15 * hi, 200)?;
    let mut traj = integrate(accel, 0.0, OdeState::new(0.0, slope), half, tol)?;
    let n = traj.len();
    traj.u[n - 1] = 0.0;
    traj.ddu[n - 1] = 0.0;
    Ok(PeriodicSolution {
        p,
        lambda,
        ell,
        slope,
        half: traj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::count_zeros;

    #[test]
    fn zero_lambda_period_two() {
        let sol = periodic_solution(4.0, 0.0, 2.0).unwrap();
        let full = sol.full_period();
        assert_eq!(count_zeros(&full), 3);
        assert!(sol.amplitude() > 0.0);
        // maximum at ℓ/4
        assert!(sol.eval(0.5).du.abs() < 1e-8);
        for k in 1..20 {
            let x = k as f64 / 20.0;
            assert!(sol.eval(x).u > 0.0);
            assert!(sol.eval(1.0 + x).u < 0.0);
        }
    }

    #[test]
    fn antisymmetry_about_half_period() {
        let sol = periodic_solution(3.0, 0.7, 3.0).unwrap();
        // integrate the full period directly and compare with the reflection
        let direct = integrate(
            |_, u| sol.accel(u),
            0.0,
            OdeState::new(0.0, sol.slope),
            3.0,
            Tolerance::default(),
        )
        .unwrap();
        for k in 1..30 {
            let t = 1.5 * k as f64 / 30.0;
            let a = direct.eval(1.5 + t).u;
            let b = direct.eval(1.5 - t).u;
            assert!((a + b).abs() < 1e-8, "t = {t}: {a} vs {b}");
        }
        assert!(direct.last().u.abs() < 1e-8);
    }

    #[test]
    fn negative_lambda_threshold() {
        let err = periodic_solution(4.0, -1.0, 2.0 * std::f64::consts::PI).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
        let sol = periodic_solution(4.0, -1.0, 6.0).unwrap();
        assert!(sol.slope > 0.0 && sol.amplitude() < 0.5);
    }
}
