//! Stationary nonlinear Schrödinger equations on metric graphs.
//!
//! Solves `-u'' + W(x) u + λ u = ρ(x) |u|^{p-2} u` on every edge of a metric
//! graph with Kirchhoff conditions at the vertices, and analyses the
//! solutions: spectra, Morse indices, nodal zones, decay and blow-up scaling.

pub mod asymptotics;
pub mod coeff;
pub mod error;
pub mod fem;
pub mod graph;
pub mod grid;
pub mod io;
pub mod morse;
pub mod nls;
pub mod spectral;
pub mod ode;
pub mod util;

pub use error::{Error, Result};
