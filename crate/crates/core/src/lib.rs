//! Numerical toolkit for the periodic KPZ fixed point.
//!
//! The crate evaluates the exact multi-point distribution functions (contour
//! integrals of Fredholm-determinant series), the conditional laws of the
//! field pinched up to a large value, and the right-tail asymptotics of the
//! one-point density. Every exact quantity has an independent stochastic
//! counterpart: Brownian-bridge samplers for the limit fields and a
//! continuous-time TASEP simulator on a ring.

pub mod distribution;
mod error;
pub mod fredholm;
pub mod limits;
pub mod montecarlo;
pub mod quad;
pub mod specfun;
pub mod tasep;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Library-wide default tolerance for series and quadrature leaves.
pub const DEFAULT_TOL: f64 = 1e-10;
