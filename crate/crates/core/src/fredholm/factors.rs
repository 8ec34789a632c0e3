use num_complex::Complex64;

use super::cauchy::cauchy_chain;
use super::{KernelParams, Selection};
use crate::specfun::{a1, a2, b_fun_tol, h_left, ComplexDisk};
use crate::{Error, Result};

/// Largest real part accepted for a log-space product before exponentiation.
pub(crate) const MAX_LOG: f64 = 700.0;

/// `log E^{i,±}(s) = −Δτ_i s³/(3p^{3/2}) ± Δγ_i s²/(2p) + Δβ_i s/p^{1/2}`
/// for the zero-based level `i`.
#[inline]
pub fn log_e(params: &KernelParams, i: usize, s: Complex64, plus: bool) -> Complex64 {
    let (dt, dg, db) = params.increments(i);
    let p = params.p;
    let sq = s * s;
    let quad = dg * sq / (2.0 * p);
    let quad = if plus { quad } else { -quad };
    -dt * sq * s / (3.0 * p * p.sqrt()) + quad + db * s / p.sqrt()
}

pub(crate) fn exp_checked(log: Complex64) -> Result<Complex64> {
    if log.re > MAX_LOG || !log.re.is_finite() {
        return Err(Error::Range(log.re));
    }
    Ok(log.exp())
}

fn check_levels(params: &KernelParams, sel: &Selection) -> Result<()> {
    if sel.u.len() != params.m() {
        return Err(Error::SizeMismatch(format!(
            "selection has {} levels, parameters have {}",
            sel.u.len(),
            params.m()
        )));
    }
    Ok(())
}

/// `E_n(U, Û) = ∏_i ∏_j E^{i,+}(u_j^{(i)}) E^{i,−}(û_j^{(i)})`.
pub fn factor_e(params: &KernelParams, sel: &Selection) -> Result<Complex64> {
    check_levels(params, sel)?;
    let mut log = Complex64::new(0.0, 0.0);
    for i in 0..params.m() {
        for u in &sel.u[i] {
            log += log_e(params, i, *u, true);
        }
        for u in &sel.uhat[i] {
            log += log_e(params, i, *u, false);
        }
    }
    exp_checked(log)
}

/// Exponent `2h_i(w) − h_{i+1}(w) − h_{i−1}(w)` of one root at level `i`.
pub(crate) fn h_exponent(params: &KernelParams, i: usize, w: Complex64, tol: f64) -> Result<Complex64> {
    let m = params.m();
    let h = |j: usize| -> Result<Complex64> { h_left(w, ComplexDisk::new(params.z[j])?, tol) };
    let mut e = 2.0 * h(i)?;
    if i + 1 < m {
        e -= h(i + 1)?;
    }
    if i > 0 {
        e -= h(i - 1)?;
    }
    Ok(e)
}

/// `H_n(U, Û)` with `h_0 = h_{m+1} = 0`.
pub fn factor_h(params: &KernelParams, sel: &Selection, tol: f64) -> Result<Complex64> {
    check_levels(params, sel)?;
    let mut log = Complex64::new(0.0, 0.0);
    for i in 0..params.m() {
        for w in sel.u[i].iter().chain(&sel.uhat[i]) {
            log += h_exponent(params, i, *w, tol)?;
        }
    }
    exp_checked(log)
}

/// `R_n(U, Û) = ∏ 1/(u û) · ∏_{i=0}^{m} Cd(U^{(i)}, −Û^{(i+1)}; Û^{(i)}, −U^{(i+1)})`.
pub fn factor_r(sel: &Selection) -> Result<Complex64> {
    let mut recip = Complex64::new(1.0, 0.0);
    for (a, b) in sel.u.iter().zip(&sel.uhat) {
        for (u, uh) in a.iter().zip(b) {
            recip /= u * uh;
        }
    }
    Ok(recip * cauchy_chain(&sel.u, &sel.uhat)?)
}

/// `R̂_n = R_n · Σ_j (u_j^{(m)} + û_j^{(m)})`.
pub fn factor_rhat(sel: &Selection) -> Result<Complex64> {
    let r = factor_r(sel)?;
    let last: Complex64 = match (sel.u.last(), sel.uhat.last()) {
        (Some(a), Some(b)) => a.iter().chain(b).sum(),
        _ => Complex64::new(0.0, 0.0),
    };
    Ok(r * last)
}

/// Which of the two prefactors to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CVariant {
    C,
    CBullet,
}

/// `C(z)` or `C•(z) = C(z) ∏_{i<m} (z_i − z_{i+1})/z_i`, with `z_{m+1} = 0`.
pub fn prefactor_c(params: &KernelParams, variant: CVariant, tol: f64) -> Result<Complex64> {
    let m = params.m();
    let sp = params.p.sqrt();
    let p32 = params.p * sp;
    let z: Vec<ComplexDisk> = params.z.iter().map(|v| ComplexDisk::new(*v)).collect::<Result<_>>()?;
    let a1v: Vec<Complex64> = z.iter().map(|v| a1(*v)).collect::<Result<_>>()?;
    let a2v: Vec<Complex64> = z.iter().map(|v| a2(*v)).collect::<Result<_>>()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut log = zero;
    for i in 0..m {
        let (a1n, a2n) = if i + 1 < m { (a1v[i + 1], a2v[i + 1]) } else { (zero, zero) };
        log += params.beta[i] / sp * (a1v[i] - a1n) + params.tau[i] / p32 * (a2v[i] - a2n);
        log += 2.0 * b_fun_tol(z[i], z[i], tol)?;
        if i + 1 < m {
            log -= 2.0 * b_fun_tol(z[i + 1], z[i], tol)?;
        }
    }
    let mut out = exp_checked(log)?;
    if variant == CVariant::C {
        for i in 0..m.saturating_sub(1) {
            let d = params.z[i] - params.z[i + 1];
            if d.norm() == 0.0 {
                return Err(Error::SingularDenominator { row: i, col: i + 1, magnitude: 0.0 });
            }
            out *= params.z[i] / d;
        }
    }
    Ok(out)
}

/// `∏_{i=2}^{m} (1 − z_{i−1}/z_i)^{n_i} (1 − z_i/z_{i−1})^{n_{i−1}}`.
pub fn d_prefactor(z: &[Complex64], n: &[usize]) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for i in 1..z.len() {
        out *= (1.0 - z[i - 1] / z[i]).powi(n[i] as i32) * (1.0 - z[i] / z[i - 1]).powi(n[i - 1] as i32);
    }
    out
}

/// `T_n(z)`: as [`d_prefactor`] with exponent `n_{i−1} − 1` on the second factor.
pub fn t_prefactor(z: &[Complex64], n: &[usize]) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for i in 1..z.len() {
        out *= (1.0 - z[i - 1] / z[i]).powi(n[i] as i32)
            * (1.0 - z[i] / z[i - 1]).powi(n[i - 1] as i32 - 1);
    }
    out
}
