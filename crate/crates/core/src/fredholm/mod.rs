//! Building blocks of the Fredholm-determinant series `D(z)`.
//!
//! The series runs over order vectors `n` and, for each, over selections of
//! roots `U, Û` of `e^{−w²/2} = z_i`. Two evaluators are provided: the
//! shell-by-shell sum ([`series_d`]) that follows the definition literally,
//! and a finite determinant ([`det::evaluate`]) that sums every order at
//! once and is what the contour quadratures use.

mod appendix_b;
mod cauchy;
pub mod det;
mod factors;
pub mod linalg;
mod roots;
mod series;

pub use appendix_b::{appendix_b_shell, series_d_appendix_b};
pub use cauchy::{cauchy_chain, cauchy_det, cauchy_det_direct};
pub use factors::{
    d_prefactor, factor_e, factor_h, factor_r, factor_rhat, log_e, prefactor_c, t_prefactor,
    CVariant,
};
pub use roots::{contour_root, enumerate_roots, RootVector};
pub use series::{series_d, shell_sum, SeriesKind, SeriesResult};

use num_complex::Complex64;

use crate::{Error, Result};

/// Parameters of the kernel: space, time and level triples, the period and
/// one point `z_i` per level.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub gamma: Vec<f64>,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: f64,
    pub z: Vec<Complex64>,
}

impl KernelParams {
    /// Validates lengths, `0 < |z_i| < 1` and pairwise distinct moduli.
    ///
    /// Both nestings of the circles are accepted: the mixed-sign formula
    /// uses increasing moduli and the all-minus formula decreasing ones.
    pub fn new(
        gamma: Vec<f64>,
        tau: Vec<f64>,
        beta: Vec<f64>,
        p: f64,
        z: Vec<Complex64>,
    ) -> Result<Self> {
        let m = z.len();
        if m == 0 {
            return Err(Error::InvalidArgument("at least one level is required".into()));
        }
        for (name, v) in [("gamma", &gamma), ("tau", &tau), ("beta", &beta)] {
            if v.len() != m {
                return Err(Error::SizeMismatch(format!(
                    "{name} has {} entries but there are {m} levels",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("period must be positive, got {p}")));
        }
        for zi in &z {
            let r = zi.norm();
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Domain(format!("|z| = {r} must lie in (0, 1)")));
            }
        }
        for i in 1..m {
            let (a, b) = (z[i - 1].norm(), z[i].norm());
            let increasing = z[1].norm() > z[0].norm();
            if (increasing && !(b > a)) || (!increasing && !(b < a)) {
                return Err(Error::ContourOrder(format!(
                    "moduli of z must be strictly monotone, got |z_{i}| = {a}, |z_{}| = {b}",
                    i + 1
                )));
            }
        }
        Ok(Self { gamma, tau, beta, p, z })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.z.len()
    }

    /// Same parameters at a different `z`; validation is repeated.
    pub fn with_z(&self, z: Vec<Complex64>) -> Result<Self> {
        Self::new(self.gamma.clone(), self.tau.clone(), self.beta.clone(), self.p, z)
    }

    /// Increments `(Δτ_i, Δγ_i, Δβ_i)` with the convention `τ_0 = γ_0 = β_0 = 0`.
    pub(crate) fn increments(&self, i: usize) -> (f64, f64, f64) {
        if i == 0 {
            (self.tau[0], self.gamma[0], self.beta[0])
        } else {
            (
                self.tau[i] - self.tau[i - 1],
                self.gamma[i] - self.gamma[i - 1],
                self.beta[i] - self.beta[i - 1],
            )
        }
    }
}

/// Cutoffs for the root sets and the order series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    /// Root index cutoff `K`: roots `u(k)` with `|k| ≤ K` are kept.
    pub roots: usize,
    /// Order cutoff `N` (each `n_i ≤ N`). `None` sums all orders exactly
    /// through the determinant.
    pub max_order: Option<usize>,
    /// Roots whose `|E(u)/u|` falls below `prune` times the largest one on
    /// the same level are dropped before any `h` is evaluated.
    pub prune: f64,
    /// Leaf tolerance for `h` and the polylogarithms.
    pub tol: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { roots: 12, max_order: None, prune: 1e-17, tol: 1e-13 }
    }
}

impl TruncationSpec {
    pub fn with_roots(roots: usize) -> Self {
        Self { roots, ..Self::default() }
    }

    pub fn capped(roots: usize, max_order: usize) -> Self {
        Self { roots, max_order: Some(max_order), prune: 0.0, ..Self::default() }
    }
}

/// Root selections `U^{(i)}`, `Û^{(i)}` per level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub u: Vec<Vec<Complex64>>,
    pub uhat: Vec<Vec<Complex64>>,
}

impl Selection {
    pub fn new(u: Vec<Vec<Complex64>>, uhat: Vec<Vec<Complex64>>) -> Result<Self> {
        if u.len() != uhat.len() {
            return Err(Error::SizeMismatch("U and Û must have the same number of levels".into()));
        }
        for (i, (a, b)) in u.iter().zip(&uhat).enumerate() {
            if a.len() != b.len() {
                return Err(Error::SizeMismatch(format!(
                    "level {} has {} roots in U but {} in Û",
                    i + 1,
                    a.len(),
                    b.len()
                )));
            }
        }
        Ok(Self { u, uhat })
    }

    pub fn orders(&self) -> Vec<usize> {
        self.u.iter().map(Vec::len).collect()
    }
}
