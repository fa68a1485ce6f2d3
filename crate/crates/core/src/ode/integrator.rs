//! Dormand–Prince 5(4) for `u'' = f(x, u)` written as a first-order system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::hermite5;

/// `(u, u')` at a point of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OdeState {
    pub u: f64,
    pub du: f64,
}

impl OdeState {
    pub fn new(u: f64, du: f64) -> Self {
        Self { u, du }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive, got rtol = {rtol}, atol = {atol}"
            )));
        }
        Ok(Self { rtol, atol })
    }
}

pub const MAX_STEPS: usize = 2_000_000;

/// Accepted steps of an integration, with `u''` stored at every node so the
/// solution can be evaluated anywhere by quintic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) x: Vec<f64>,
    pub(crate) u: Vec<f64>,
    pub(crate) du: Vec<f64>,
    pub(crate) ddu: Vec<f64>,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Build from node data; `x` must be strictly monotone.
    pub fn from_nodes(x: Vec<f64>, u: Vec<f64>, du: Vec<f64>, ddu: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || u.len() != n || du.len() != n || ddu.len() != n {
            return Err(Error::InvalidArgument("trajectory needs >= 2 consistent nodes".into()));
        }
        let dir = (x[1] - x[0]).signum();
        if dir == 0.0 || x.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
            return Err(Error::InvalidArgument("trajectory grid must be strictly monotone".into()));
        }
        Ok(Self {
            x,
            u,
            du,
            ddu,
            rejected_steps: 0,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.du
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.ddu
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        *self.x.last().expect("nonempty")
    }

    pub fn state(&self, i: usize) -> OdeState {
        OdeState::new(self.u[i], self.du[i])
    }

    pub fn last(&self) -> OdeState {
        self.state(self.x.len() - 1)
    }

    /// Dense evaluation on step `i` (between nodes `i` and `i+1`) at local
    /// coordinate `t` in `[0, 1]`.
    pub fn eval_step(&self, i: usize, t: f64) -> OdeState {
        let h = self.x[i + 1] - self.x[i];
        let (u, du) = hermite5(
            t,
            h,
            [self.u[i], self.du[i], self.ddu[i]],
            [self.u[i + 1], self.du[i + 1], self.ddu[i + 1]],
        );
        OdeState::new(u, du)
    }

    /// Dense evaluation anywhere in the covered interval (clamped to it).
    pub fn eval(&self, x: f64) -> OdeState {
        let n = self.x.len();
        let forward = self.x[n - 1] > self.x[0];
        let key = |v: f64| if forward { v } else { -v };
        let target = key(x);
        let i = self
            .x
            .partition_point(|&v| key(v) <= target)
            .saturating_sub(1)
            .min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let t = ((x - self.x[i]) / h).clamp(0.0, 1.0);
        self.eval_step(i, t)
    }

    /// Continue an odd reflection through the end point `c = end()`:
    /// `u(c + t) = -u(c - t)`. Requires `u(c) = 0` (forced exactly).
    pub fn reflect_odd(&self) -> Self {
        let c = self.end();
        let n = self.x.len();
        let mut out = self.clone();
        out.u[n - 1] = 0.0;
        out.ddu[n - 1] = 0.0;
        for i in (0..n - 1).rev() {
            out.x.push(2.0 * c - self.x[i]);
            out.u.push(-self.u[i]);
            out.du.push(self.du[i]);
            out.ddu.push(-self.ddu[i]);
        }
        out
    }

    /// Largest `|u|` over the nodes.
    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Y = [f64; 2];

#[inline]
fn comb(y: Y, h: f64, terms: &[(f64, Y)]) -> Y {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn error_norm(y0: Y, y1: Y, err: Y, tol: Tolerance) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        let sk = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sk).powi(2);
    }
    (s / 2.0).sqrt()
}

/// Integrate `u'' = accel(x, u)` from `x0` to `x1` (either direction).
pub fn integrate<F: Fn(f64, f64) -> f64>(
    accel: F,
    x0: f64,
    init: OdeState,
    x1: f64,
    tol: Tolerance,
) -> Result<Trajectory> {
    integrate_until(accel, x0, init, x1, tol, |_, _| false)
}

/// Like [`integrate`], but stops after the first accepted step whose end
/// state satisfies `stop`.
pub fn integrate_until<F, S>(
    accel: F,
    x0: f64,
    init: OdeState,
    x1: f64,
    tol: Tolerance,
    mut stop: S,
) -> Result<Trajectory>
where
    F: Fn(f64, f64) -> f64,
    S: FnMut(f64, OdeState) -> bool,
{
    if !(x0.is_finite() && x1.is_finite()) || x0 == x1 {
        return Err(Error::InvalidArgument(format!(
            "integration interval [{x0}, {x1}] is empty or not finite"
        )));
    }
    if !(init.u.is_finite() && init.du.is_finite()) {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }
    let f = |x: f64, y: Y| -> Y { [y[1], accel(x, y[0])] };
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();

    let mut x = x0;
    let mut y: Y = [init.u, init.du];
    let mut k1 = f(x, y);
    let mut traj = Trajectory {
        x: vec![x],
        u: vec![y[0]],
        du: vec![y[1]],
        ddu: vec![k1[1]],
        rejected_steps: 0,
    };

    // initial step guess
    let mut h = {
        let sk = |v: f64| tol.atol + tol.rtol * v.abs();
        let d0 = ((y[0] / sk(y[0])).powi(2) + (y[1] / sk(y[1])).powi(2)).sqrt() / 2f64.sqrt();
        let d1 = ((k1[0] / sk(y[0])).powi(2) + (k1[1] / sk(y[1])).powi(2)).sqrt() / 2f64.sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = comb(y, dir * h0, &[(1.0, k1)]);
        let f1 = f(x + dir * h0, y1);
        let d2 = (((f1[0] - k1[0]) / sk(y[0])).powi(2) + ((f1[1] - k1[1]) / sk(y[1])).powi(2))
            .sqrt()
            / 2f64.sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).max(1e-10 * (1.0 + x0.abs())).min(span)
    };

    let mut steps = 0usize;
    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * (1.0 + x.abs()) {
            return Err(Error::StepUnderflow { x });
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::TooManySteps(MAX_STEPS));
        }
        let hs = dir * h;
        let k2 = f(x + C2 * hs, comb(y, hs, &[(A21, k1)]));
        let k3 = f(x + C3 * hs, comb(y, hs, &[(A31, k1), (A32, k2)]));
        let k4 = f(x + C4 * hs, comb(y, hs, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = f(
            x + C5 * hs,
            comb(y, hs, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        );
        let k6 = f(
            x + hs,
            comb(y, hs, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
        );
        let y_new = comb(y, hs, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
        let x_new = if last { x1 } else { x + hs };
        let k7 = f(x_new, y_new);
        let mut e = [0.0; 2];
        for i in 0..2 {
            e[i] = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = error_norm(y, y_new, e, tol);
        if !err.is_finite() {
            traj.rejected_steps += 1;
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            traj.x.push(x);
            traj.u.push(y[0]);
            traj.du.push(y[1]);
            traj.ddu.push(k1[1]);
            if last || stop(x, OdeState::new(y[0], y[1])) {
                break;
            }
            let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            h *= fac;
        } else {
            traj.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_cosh() {
        let traj = integrate(|_, u| u, 0.0, OdeState::new(1.0, 0.0), 1.0, Tolerance::default()).unwrap();
        assert!((traj.last().u - 1f64.cosh()).abs() < 1e-8);
        assert_eq!(traj.start(), 0.0);
        assert_eq!(traj.end(), 1.0);
        let mid = traj.eval(0.37);
        assert!((mid.u - 0.37f64.cosh()).abs() < 1e-9);
        assert!((mid.du - 0.37f64.sinh()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_backward() {
        let traj = integrate(|_, u| -u, 0.0, OdeState::new(0.0, 1.0), -2.0, Tolerance::default()).unwrap();
        assert!((traj.last().u - (-2f64).sin()).abs() < 1e-9);
        let st = traj.eval(-1.3);
        assert!((st.u - (-1.3f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn stop_predicate_ends_early() {
        let traj = integrate_until(
            |_, u| -u,
            0.0,
            OdeState::new(0.0, 1.0),
            10.0,
            Tolerance::default(),
            |_, s| s.u < 0.0,
        )
        .unwrap();
        assert!(traj.end() > std::f64::consts::PI && traj.end() < 5.0);
    }

    #[test]
    fn odd_reflection() {
        let pi = std::f64::consts::PI;
        let half = integrate(|_, u| -u, 0.0, OdeState::new(0.0, 1.0), pi, Tolerance::default()).unwrap();
        let full = half.reflect_odd();
        assert_eq!(full.end(), 2.0 * pi);
        assert!((full.eval(1.5 * pi).u + 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(integrate(|_, u| u, 1.0, OdeState::default(), 1.0, Tolerance::default()).is_err());
    }
}
