use num_complex::Complex64;

use super::cauchy::cauchy_chain;
use super::factors::{d_prefactor, exp_checked, h_exponent, log_e};
use super::roots::enumerate_roots;
use super::{KernelParams, TruncationSpec};
use crate::specfun::ComplexDisk;
use crate::Result;

/// `D` sums `H R E`; `DHat` sums `H R̂ E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    D,
    DHat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub value: Complex64,
    /// `|Σ|` over the order vectors with `max n_i = N`.
    pub last_shell: f64,
    /// `shells[j]` is `Σ_{|n| = j} |D_n|/(n!)²`.
    pub shells: Vec<f64>,
    pub terms: usize,
}

pub(crate) struct LevelWeights {
    pub roots: Vec<Complex64>,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

/// Per-root weights `H E / u` for both signs of `E`.
pub(crate) fn level_weights(params: &KernelParams, k: usize, tol: f64) -> Result<Vec<LevelWeights>> {
    (0..params.m())
        .map(|i| {
            let rv = enumerate_roots(ComplexDisk::new(params.z[i])?, k)?;
            let mut plus = Vec::with_capacity(rv.roots.len());
            let mut minus = Vec::with_capacity(rv.roots.len());
            for u in &rv.roots {
                let h = h_exponent(params, i, *u, tol)?;
                plus.push(exp_checked(h + log_e(params, i, *u, true))? / u);
                minus.push(exp_checked(h + log_e(params, i, *u, false))? / u);
            }
            Ok(LevelWeights { roots: rv.roots, plus, minus })
        })
        .collect()
}

pub(crate) fn combinations(len: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=len - left {
            cur.push(i);
            rec(i + 1, len, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= len {
        rec(0, len, size, &mut Vec::new(), &mut out);
    }
    out
}

/// `D_n(z)/(n!)²` (or the hatted version) for one order vector, as a sum over
/// strictly increasing root-index tuples.
pub fn shell_sum(
    params: &KernelParams,
    trunc: &TruncationSpec,
    n: &[usize],
    kind: SeriesKind,
) -> Result<Complex64> {
    let levels = level_weights(params, trunc.roots, trunc.tol)?;
    Ok(shell_from_weights(params, &levels, n, kind)?.0)
}

fn shell_from_weights(
    params: &KernelParams,
    levels: &[LevelWeights],
    n: &[usize],
    kind: SeriesKind,
) -> Result<(Complex64, usize)> {
    let m = params.m();
    let subsets: Vec<Vec<Vec<usize>>> =
        (0..m).map(|i| combinations(levels[i].roots.len(), n[i])).collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    let mut pick_s: Vec<&[usize]> = vec![&[]; m];
    let mut pick_t: Vec<&[usize]> = vec![&[]; m];

    #[allow(clippy::too_many_arguments)]
    fn rec<'a>(
        depth: usize,
        m: usize,
        subsets: &'a [Vec<Vec<usize>>],
        levels: &[LevelWeights],
        pick_s: &mut Vec<&'a [usize]>,
        pick_t: &mut Vec<&'a [usize]>,
        kind: SeriesKind,
        total: &mut Complex64,
        terms: &mut usize,
    ) -> Result<()> {
        if depth == 2 * m {
            let mut w = Complex64::new(1.0, 0.0);
            let mut u = Vec::with_capacity(m);
            let mut uh = Vec::with_capacity(m);
            for i in 0..m {
                let lv = &levels[i];
                u.push(pick_s[i].iter().map(|&j| lv.roots[j]).collect::<Vec<_>>());
                uh.push(pick_t[i].iter().map(|&j| lv.roots[j]).collect::<Vec<_>>());
                for &j in pick_s[i] {
                    w *= lv.plus[j];
                }
                for &j in pick_t[i] {
                    w *= lv.minus[j];
                }
            }
            let mut term = w * cauchy_chain(&u, &uh)?;
            if kind == SeriesKind::DHat {
                let s: Complex64 = u[m - 1].iter().chain(&uh[m - 1]).sum();
                term *= s;
            }
            *total += term;
            *terms += 1;
            return Ok(());
        }
        let lvl = depth / 2;
        for sub in &subsets[lvl] {
            if depth % 2 == 0 {
                pick_s[lvl] = sub;
            } else {
                pick_t[lvl] = sub;
            }
            rec(depth + 1, m, subsets, levels, pick_s, pick_t, kind, total, terms)?;
        }
        Ok(())
    }

    rec(0, m, &subsets, levels, &mut pick_s, &mut pick_t, kind, &mut total, &mut terms)?;
    Ok((total * d_prefactor(&params.z, n), terms))
}

/// `Σ_n D_n(z)/(n!)²` over `0 ≤ n_i ≤ N` (or `1 ≤ n_i ≤ N` when
/// `include_zero_orders` is false), with the `(n!)²` absorbed by summing over
/// increasing root-index tuples.
pub fn series_d(
    params: &KernelParams,
    trunc: &TruncationSpec,
    kind: SeriesKind,
    include_zero_orders: bool,
) -> Result<SeriesResult> {
    let m = params.m();
    let cap = trunc.max_order.unwrap_or(3);
    let lo = if include_zero_orders { 0 } else { 1 };
    let levels = level_weights(params, trunc.roots, trunc.tol)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut last = Complex64::new(0.0, 0.0);
    let mut shells = vec![0.0; m * cap + 1];
    let mut terms = 0usize;
    let mut n = vec![lo; m];
    if lo > cap {
        return Ok(SeriesResult { value, last_shell: 0.0, shells, terms });
    }
    loop {
        let (v, t) = shell_from_weights(params, &levels, &n, kind)?;
        value += v;
        terms += t;
        shells[n.iter().sum::<usize>()] += v.norm();
        if n.iter().any(|&x| x == cap) {
            last += v;
        }
        let mut i = 0;
        loop {
            if i == m {
                return Ok(SeriesResult { value, last_shell: last.norm(), shells, terms });
            }
            n[i] += 1;
            if n[i] <= cap {
                break;
            }
            n[i] = lo;
            i += 1;
        }
    }
}
