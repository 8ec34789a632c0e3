//! The original form of `D_n(z)` over left roots `U^{(i)}` and right roots
//! `V^{(i)}`, kept as an independent check of the Cauchy-determinant form.

use num_complex::Complex64;

use super::factors::d_prefactor;
use super::roots::enumerate_roots;
use super::{KernelParams, TruncationSpec};
use crate::specfun::{h_left, h_right, ComplexDisk};
use crate::Result;

struct Side {
    /// roots of this side at every level
    roots: Vec<Vec<Complex64>>,
    /// `f̂_i(w)` per level and root
    fhat: Vec<Vec<Complex64>>,
    /// `h(w, z_{i−1})` and `h(w, z_{i+1})` (zero outside `1..m`)
    h_prev: Vec<Vec<Complex64>>,
    h_next: Vec<Vec<Complex64>>,
}

fn f_level(params: &KernelParams, i: usize, w: Complex64) -> Complex64 {
    let (dt, dg, db) = params.increments(i);
    let p = params.p;
    let e = -dt * w * w * w / (3.0 * p * p.sqrt()) + dg * w * w / (2.0 * p) + db * w / p.sqrt();
    if w.re < 0.0 {
        e.exp()
    } else {
        (-e).exp()
    }
}

fn h_any(w: Complex64, z: Complex64, tol: f64) -> Result<Complex64> {
    let z = ComplexDisk::new(z)?;
    if w.re < 0.0 {
        h_left(w, z, tol)
    } else {
        h_right(w, z, tol)
    }
}

fn build_side(params: &KernelParams, trunc: &TruncationSpec, right: bool) -> Result<Side> {
    let m = params.m();
    let zero = Complex64::new(0.0, 0.0);
    let mut side = Side { roots: vec![], fhat: vec![], h_prev: vec![], h_next: vec![] };
    for i in 0..m {
        let rv = enumerate_roots(ComplexDisk::new(params.z[i])?, trunc.roots)?;
        let roots = if right { rv.negated() } else { rv.roots };
        let mut fh = Vec::new();
        let mut hp = Vec::new();
        let mut hn = Vec::new();
        for w in &roots {
            let hs = h_any(*w, params.z[i], trunc.tol)?;
            fh.push(f_level(params, i, *w) * (2.0 * hs).exp() / w);
            hp.push(if i > 0 { h_any(*w, params.z[i - 1], trunc.tol)? } else { zero });
            hn.push(if i + 1 < m { h_any(*w, params.z[i + 1], trunc.tol)? } else { zero });
        }
        side.roots.push(roots);
        side.fhat.push(fh);
        side.h_prev.push(hp);
        side.h_next.push(hn);
    }
    Ok(side)
}

fn vandermonde(w: &[Complex64]) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            out *= w[j] - w[i];
        }
    }
    out
}

fn cross(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for x in a {
        for y in b {
            out *= x - y;
        }
    }
    out
}

fn tuples(len: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..size {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..len).map(move |j| {
                    let mut t = t.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `D_n(z)/(n!)²` from the `(U, V)` form, summing over ordered tuples.
pub fn appendix_b_shell(params: &KernelParams, trunc: &TruncationSpec, n: &[usize]) -> Result<Complex64> {
    let left = build_side(params, trunc, false)?;
    let right = build_side(params, trunc, true)?;
    Ok(shell(params, &left, &right, n))
}

fn shell(params: &KernelParams, left: &Side, right: &Side, n: &[usize]) -> Complex64 {
    let m = params.m();
    let choices: Vec<Vec<Vec<usize>>> = (0..m).map(|i| tuples(left.roots[i].len(), n[i])).collect();
    let mut idx_u: Vec<usize> = vec![0; m];
    let mut idx_v: Vec<usize> = vec![0; m];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let us: Vec<Vec<Complex64>> =
            (0..m).map(|i| choices[i][idx_u[i]].iter().map(|&j| left.roots[i][j]).collect()).collect();
        let vs: Vec<Vec<Complex64>> =
            (0..m).map(|i| choices[i][idx_v[i]].iter().map(|&j| right.roots[i][j]).collect()).collect();
        let mut term = Complex64::new(1.0, 0.0);
        let mut hlog = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let du = vandermonde(&us[i]);
            let dv = vandermonde(&vs[i]);
            term *= du * du * dv * dv;
            let duv = cross(&us[i], &vs[i]);
            term /= duv * duv;
            for &j in &choices[i][idx_u[i]] {
                term *= left.fhat[i][j];
            }
            for &j in &choices[i][idx_v[i]] {
                term *= right.fhat[i][j];
            }
            if i > 0 {
                term *= cross(&us[i], &vs[i - 1]) * cross(&vs[i], &us[i - 1]);
                term /= cross(&us[i], &us[i - 1]) * cross(&vs[i], &vs[i - 1]);
                for &j in &choices[i][idx_v[i]] {
                    hlog -= right.h_prev[i][j];
                }
                for &j in &choices[i - 1][idx_v[i - 1]] {
                    hlog -= right.h_next[i - 1][j];
                }
                for &j in &choices[i][idx_u[i]] {
                    hlog -= left.h_prev[i][j];
                }
                for &j in &choices[i - 1][idx_u[i - 1]] {
                    hlog -= left.h_next[i - 1][j];
                }
            }
        }
        if term.is_finite() {
            total += term * hlog.exp();
        }
        // odometer over (U, V) tuple choices
        let mut lvl = 0;
        loop {
            if lvl == 2 * m {
                let norm: f64 = n.iter().map(|&k| factorial(k) * factorial(k)).product();
                return total * d_prefactor(&params.z, n) / norm;
            }
            let (arr, i) = if lvl < m { (&mut idx_u, lvl) } else { (&mut idx_v, lvl - m) };
            arr[i] += 1;
            if arr[i] < choices[i].len() {
                break;
            }
            arr[i] = 0;
            lvl += 1;
        }
    }
}

/// `Σ_n D_n(z)/(n!)²` over `0 ≤ n_i ≤ N` from the `(U, V)` form.
pub fn series_d_appendix_b(params: &KernelParams, trunc: &TruncationSpec) -> Result<Complex64> {
    let m = params.m();
    let cap = trunc.max_order.unwrap_or(3);
    let left = build_side(params, trunc, false)?;
    let right = build_side(params, trunc, true)?;
    let mut n = vec![0usize; m];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        total += shell(params, &left, &right, &n);
        let mut i = 0;
        loop {
            if i == m {
                return Ok(total);
            }
            n[i] += 1;
            if n[i] <= cap {
                break;
            }
            n[i] = 0;
            i += 1;
        }
    }
}
