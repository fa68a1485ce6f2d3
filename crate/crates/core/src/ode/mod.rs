//! Single-edge ODE machinery.

mod hartman;
mod integrator;
mod periodic;
mod soliton;
mod zeros;

pub use hartman::{hartman_threshold, min_zero_count, HartmanEstimate, HartmanQuery};
pub use integrator::{integrate, integrate_until, OdeState, Tolerance, Trajectory, MAX_STEPS};
pub use periodic::{periodic_max_length, periodic_solution, PeriodicSolution};
pub use soliton::{soliton, soliton_mass, soliton_peak, soliton_state};
pub use zeros::{count_zeros, count_zeros_with_tol};

use crate::coeff::EdgeProblem;
use crate::error::{Error, Result};

/// Integrate the edge equation `u'' = (W + λ) u - ρ |u|^{p-2} u` on `[x0, x1]`.
pub fn integrate_edge(
    prob: &EdgeProblem<'_>,
    init: OdeState,
    x0: f64,
    x1: f64,
    tol: Tolerance,
) -> Result<Trajectory> {
    integrate(|x, u| prob.accel(x, u), x0, init, x1, tol)
}

/// `H = u'^2/2 + |u|^p/p - λu^2/2`, conserved when `W ≡ 0` and `ρ ≡ 1`.
pub fn energy(state: OdeState, p: f64, lambda: f64) -> f64 {
    0.5 * state.du * state.du + state.u.abs().powf(p) / p - 0.5 * lambda * state.u * state.u
}

/// [`energy`] for an edge problem, refusing coefficients for which `H` is not
/// conserved.
pub fn ode_energy(state: OdeState, prob: &EdgeProblem<'_>) -> Result<f64> {
    if prob.w.as_const() != Some(0.0) || prob.rho.as_const() != Some(1.0) {
        return Err(Error::InvalidArgument(
            "energy is conserved only for W ≡ 0 and rho ≡ 1".into(),
        ));
    }
    Ok(energy(state, prob.p, prob.lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::EdgeCoefficient;
    use proptest::prelude::*;

    fn standard(p: f64, lambda: f64) -> (EdgeCoefficient, EdgeCoefficient, f64, f64) {
        (EdgeCoefficient::Const(0.0), EdgeCoefficient::Const(1.0), p, lambda)
    }

    #[test]
    fn energy_values() {
        let (w, r, p, l) = standard(4.0, -1.0);
        let prob = EdgeProblem { p, lambda: l, w: &w, rho: &r };
        assert_eq!(ode_energy(OdeState::new(0.0, 0.0), &prob).unwrap(), 0.0);
        assert!((ode_energy(OdeState::new(1.0, 0.0), &prob).unwrap() - 0.75).abs() < 1e-15);
        let w2 = EdgeCoefficient::Const(0.5);
        let bad = EdgeProblem { p, lambda: l, w: &w2, rho: &r };
        assert!(ode_energy(OdeState::new(1.0, 0.0), &bad).is_err());
    }

    #[test]
    fn soliton_energy_is_zero() {
        for x in [-3.0, 0.0, 0.7, 5.0] {
            let s = soliton_state(4.0, 2.0, x).unwrap();
            assert!(energy(s, 4.0, 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn soliton_trajectory_matches_closed_form() {
        let (w, r, p, l) = standard(4.0, 1.0);
        let prob = EdgeProblem { p, lambda: l, w: &w, rho: &r };
        let init = soliton_state(4.0, 1.0, 0.0).unwrap();
        let traj = integrate_edge(&prob, init, 0.0, 5.0, Tolerance::default()).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=500 {
            let x = 5.0 * k as f64 / 500.0;
            worst = worst.max((traj.eval(x).u - soliton(4.0, 1.0, x).unwrap()).abs());
        }
        assert!(worst < 1e-7, "sup error {worst}");
    }

    #[test]
    fn time_reversal() {
        let (w, r, p, l) = standard(3.0, 0.5);
        let prob = EdgeProblem { p, lambda: l, w: &w, rho: &r };
        let init = OdeState::new(0.8, -0.3);
        let fwd = integrate_edge(&prob, init, 0.0, 4.0, Tolerance::default()).unwrap();
        let back = integrate_edge(&prob, fwd.last(), 4.0, 0.0, Tolerance::default()).unwrap();
        let end = back.last();
        assert!((end.u - init.u).abs() < 1e-7 && (end.du - init.du).abs() < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn energy_conserved(p in 2.2f64..8.0, lambda in -3.0f64..3.0, u0 in -2.0f64..2.0, du0 in -2.0f64..2.0, len in 0.5f64..6.0) {
            let (w, r, _, _) = standard(p, lambda);
            let prob = EdgeProblem { p, lambda, w: &w, rho: &r };
            let init = OdeState::new(u0, du0);
            let traj = integrate_edge(&prob, init, 0.0, len, Tolerance::default()).unwrap();
            let h0 = energy(init, p, lambda);
            for i in 0..traj.len() {
                let h = energy(traj.state(i), p, lambda);
                prop_assert!((h - h0).abs() <= 1e-8 * (1.0 + h0.abs()), "{} vs {}", h, h0);
            }
        }
    }
}
