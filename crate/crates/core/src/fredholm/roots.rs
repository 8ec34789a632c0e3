use std::f64::consts::PI;

use num_complex::Complex64;

use crate::specfun::ComplexDisk;
use crate::{Error, Result};

/// Roots `u(k)`, `|k| ≤ K`, of `e^{−u²/2} = z` in the left half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RootVector {
    pub base: ComplexDisk,
    pub cutoff: usize,
    /// `roots[j]` is `u(j − K)`.
    pub roots: Vec<Complex64>,
}

impl RootVector {
    /// The root with index `k`, if inside the cutoff.
    pub fn get(&self, k: i64) -> Option<Complex64> {
        let idx = k + self.cutoff as i64;
        if idx < 0 {
            return None;
        }
        self.roots.get(idx as usize).copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        let k = self.cutoff as i64;
        -k..=k
    }

    /// The right half-plane set `R_z`, i.e. the negated roots.
    pub fn negated(&self) -> Vec<Complex64> {
        self.roots.iter().map(|u| -u).collect()
    }
}

/// `u = −√w` with the principal root, so `Re u < 0` whenever `w ∉ (−∞, 0]`.
#[inline]
pub(crate) fn left_sqrt(w: Complex64) -> Complex64 {
    let s = -w.sqrt();
    if s.re > 0.0 {
        -s
    } else {
        s
    }
}

/// `u(k) = −√(−2 Log z + 4πik)`.
pub fn enumerate_roots(z: ComplexDisk, k: usize) -> Result<RootVector> {
    let zv = z.value();
    if zv.norm() == 0.0 {
        return Err(Error::Domain("L_z is empty at z = 0".into()));
    }
    let base = -2.0 * zv.ln();
    let kk = k as i64;
    let roots: Vec<Complex64> = (-kk..=kk)
        .map(|j| left_sqrt(base + Complex64::new(0.0, 4.0 * PI * j as f64)))
        .collect();
    for (j, u) in roots.iter().enumerate() {
        let resid = ((-u * u / 2.0).exp() - zv).norm();
        if resid > 1e-12 * zv.norm() || !(u.re < 0.0) {
            return Err(Error::NonConvergence(format!(
                "root k = {} of z = {zv} has residual {resid:e}",
                j as i64 - kk
            )));
        }
    }
    Ok(RootVector { base: z, cutoff: k, roots })
}

/// The contour root `u_i(k) = −√(ℓp + 2rρ_i − 2iθ_i + 4πik)` written through
/// `L = −Log z_i`, i.e. `u = −√(2L + 4πik)`.
#[inline]
pub fn contour_root(neg_log_z: Complex64, k: i64) -> Complex64 {
    left_sqrt(2.0 * neg_log_z + Complex64::new(0.0, 4.0 * PI * k as f64))
}
