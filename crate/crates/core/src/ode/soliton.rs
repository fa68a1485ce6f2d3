//! The soliton `φ_λ`: the positive even decaying solution of
//! `-u'' + λu = |u|^{p-2} u` on the line.

use super::OdeState;
use crate::error::{Error, Result};
use crate::util::adaptive_simpson;

fn check(p: f64, lambda: f64) -> Result<()> {
    if !(p > 2.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 2, got {p}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "soliton needs lambda > 0, got {lambda}"
        )));
    }
    Ok(())
}

/// `sech(z)` without overflow.
fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Peak value `(pλ/2)^{1/(p-2)}`.
pub fn soliton_peak(p: f64, lambda: f64) -> f64 {
    (p * lambda / 2.0).powf(1.0 / (p - 2.0))
}

/// `φ_1` and `φ_1'` at `y`.
fn unit(p: f64, y: f64) -> (f64, f64) {
    let z = 0.5 * (p - 2.0) * y;
    let v = (p / 2.0).powf(1.0 / (p - 2.0)) * sech(z).powf(2.0 / (p - 2.0));
    (v, -v * z.tanh())
}

pub fn soliton(p: f64, lambda: f64, x: f64) -> Result<f64> {
    Ok(soliton_state(p, lambda, x)?.u)
}

pub fn soliton_state(p: f64, lambda: f64, x: f64) -> Result<OdeState> {
    check(p, lambda)?;
    let amp = lambda.powf(1.0 / (p - 2.0));
    let k = lambda.sqrt();
    let (v, dv) = unit(p, k * x);
    Ok(OdeState::new(amp * v, amp * k * dv))
}

/// `∫_R φ_λ^q`. The unit profile is integrated by adaptive Simpson on
/// `[0, Y]` and closed with its exponential asymptote; `λ` enters through the
/// scaling factor `λ^{q/(p-2) - 1/2}`.
pub fn soliton_mass(p: f64, lambda: f64, q: f64) -> Result<f64> {
    check(p, lambda)?;
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("q must be >= 1, got {q}")));
    }
    let cut = 40.0;
    let body = adaptive_simpson(&|y: f64| unit(p, y).0.powf(q), 0.0, cut, 1e-15);
    // φ_1(y) ~ C e^{-y}, so the remainder is φ_1(Y)^q / q
    let tail = unit(p, cut).0.powf(q) / q;
    let unit_mass = 2.0 * (body + tail);
    Ok(lambda.powf(q / (p - 2.0) - 0.5) * unit_mass)
}
