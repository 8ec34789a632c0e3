//! Exact all-order evaluation of `D(z)` and `D̂(z)` as a finite determinant.
//!
//! Each root selected in `U^{(i)}` (an "S" element) or `Û^{(i)}` (a "T"
//! element) occupies a row of one Cauchy block and a column of the
//! neighbouring one. Splitting elements into `P = (T_1, S_2, T_3, …)` and
//! `Q = (S_1, T_2, S_3, …)` makes the chain of blocks bipartite, and by
//! Cauchy–Binet
//!
//! `Σ_n D_n/(n!)² = det(I + Ω_P A Ω_Q B)`
//!
//! with `A = [1/(x_p + y_q)]`, `B = [1/(x_q + y_p)]` restricted to matching
//! blocks. `D̂` is the derivative of the same determinant when the level-`m`
//! weights carry a factor `e^{ε·root}`.

use num_complex::Complex64;

use super::factors::{log_e, MAX_LOG};
use super::linalg::{CMatrix, Lu};
use super::roots::contour_root;
use super::{KernelParams, TruncationSpec};
use crate::specfun::h_left_unchecked;
use crate::{Error, Result};

/// Data of one level that depends on `z_i` alone.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub z: Complex64,
    /// roots kept for `U^{(i)}` and `log(E^{i,+}(u)) + 2h(u, z_i)`
    pub s_roots: Vec<Complex64>,
    pub s_log: Vec<Complex64>,
    /// roots kept for `Û^{(i)}` and `log(E^{i,−}(û)) + 2h(û, z_i)`
    pub t_roots: Vec<Complex64>,
    pub t_log: Vec<Complex64>,
    /// `|E/u|` of the outermost roots `k = ±K` relative to the largest one
    pub edge: f64,
}

impl LevelData {
    /// Builds level `i` (zero-based) at the point `z`. Only the increments of
    /// `params` are read; `params.z` is ignored.
    pub fn build(params: &KernelParams, i: usize, z: Complex64, trunc: &TruncationSpec) -> Result<Self> {
        let r = z.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("|z| = {r} must lie in (0, 1)")));
        }
        let nl = -z.ln();
        let kk = trunc.roots as i64;
        let roots: Vec<Complex64> = (-kk..=kk).map(|k| contour_root(nl, k)).collect();
        let lp: Vec<Complex64> = roots.iter().map(|u| log_e(params, i, *u, true)).collect();
        let lm: Vec<Complex64> = roots.iter().map(|u| log_e(params, i, *u, false)).collect();
        let mag = |l: &Complex64, u: &Complex64| l.re - u.norm().ln();
        let ms: Vec<f64> = lp.iter().zip(&roots).map(|(l, u)| mag(l, u)).collect();
        let mt: Vec<f64> = lm.iter().zip(&roots).map(|(l, u)| mag(l, u)).collect();
        let max_s = ms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let max_t = mt.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cut = if trunc.prune > 0.0 { trunc.prune.ln() } else { f64::NEG_INFINITY };
        let last = roots.len() - 1;
        let edge = [ms[0] - max_s, ms[last] - max_s, mt[0] - max_t, mt[last] - max_t]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            .exp();
        let mut out = LevelData {
            z,
            s_roots: vec![],
            s_log: vec![],
            t_roots: vec![],
            t_log: vec![],
            edge,
        };
        for (j, u) in roots.iter().enumerate() {
            let keep_s = ms[j] - max_s >= cut;
            let keep_t = mt[j] - max_t >= cut;
            if !(keep_s || keep_t) {
                continue;
            }
            let h2 = 2.0 * h_left_unchecked(*u, z, trunc.tol);
            if keep_s {
                out.s_roots.push(*u);
                out.s_log.push(lp[j] + h2);
            }
            if keep_t {
                out.t_roots.push(*u);
                out.t_log.push(lm[j] + h2);
            }
        }
        Ok(out)
    }
}

/// What to compute at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Want {
    /// `Σ_{n ∈ {0,1,…}^m}` of `D` (and `D̂` if `hat`)
    pub all: bool,
    /// `Σ_{n ∈ ℕ^m}`
    pub positive: bool,
    /// the `n = (1, …, 1)` term
    pub ones: bool,
    pub hat: bool,
}

/// Series values at one node; unset entries are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeValues {
    pub d_all: Complex64,
    pub dhat_all: Complex64,
    pub d_pos: Complex64,
    pub dhat_pos: Complex64,
    pub d_one: Complex64,
    pub dhat_one: Complex64,
    /// largest relative `|E/u|` of an outermost root over the levels
    pub edge: f64,
    /// number of root elements entering the determinant
    pub elements: usize,
}

#[derive(Debug, Clone, Copy)]
struct Element {
    level: usize,
    root: Complex64,
    x: Complex64,
    y: Complex64,
    row_block: usize,
    col_block: usize,
    w: Complex64,
}

fn weight(log: Complex64, root: Complex64) -> Result<Complex64> {
    if !log.re.is_finite() {
        return Err(Error::IllConditioned(format!("weight exponent is {}", log.re)));
    }
    if log.re > MAX_LOG {
        return Err(Error::Range(log.re));
    }
    Ok(log.exp() / root)
}

fn recip(a: Complex64, scale: f64) -> Result<Complex64> {
    if a.norm() < 1e-13 * scale {
        return Err(Error::SingularDenominator { row: 0, col: 0, magnitude: a.norm() });
    }
    Ok(1.0 / a)
}

/// Evaluates the requested series at the node `z = (levels[i].z)`.
pub fn evaluate(levels: &[&LevelData], want: Want, tol: f64) -> Result<NodeValues> {
    let m = levels.len();
    let zero = Complex64::new(0.0, 0.0);
    let z: Vec<Complex64> = levels.iter().map(|l| l.z).collect();
    let mut s_w: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut t_w: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for i in 0..m {
        let lv = levels[i];
        let mut c = Complex64::new(1.0, 0.0);
        if i > 0 {
            c *= 1.0 - z[i - 1] / z[i];
        }
        if i + 1 < m {
            c *= 1.0 - z[i + 1] / z[i];
        }
        let cross = |u: Complex64| -> Complex64 {
            let mut e = zero;
            if i > 0 {
                e += h_left_unchecked(u, z[i - 1], tol);
            }
            if i + 1 < m {
                e += h_left_unchecked(u, z[i + 1], tol);
            }
            e
        };
        let sl: Vec<Complex64> = lv.s_roots.iter().zip(&lv.s_log).map(|(u, l)| l - cross(*u)).collect();
        let tl: Vec<Complex64> = lv.t_roots.iter().zip(&lv.t_log).map(|(u, l)| l - cross(*u)).collect();
        // every term holds as many S as T roots of a level, so S weights may
        // be scaled by λ and T weights by 1/λ; balance their magnitudes
        let top = |ls: &[Complex64], us: &[Complex64]| {
            ls.iter().zip(us).map(|(l, u)| l.re - u.norm().ln()).fold(f64::NEG_INFINITY, f64::max)
        };
        let (ms, mt) = (top(&sl, &lv.s_roots), top(&tl, &lv.t_roots));
        let shift = if ms.is_finite() && mt.is_finite() { (ms - mt) / 2.0 } else { 0.0 };
        let mut sw = Vec::with_capacity(sl.len());
        for (u, l) in lv.s_roots.iter().zip(&sl) {
            sw.push(weight(l - shift, *u)? * c);
        }
        let mut tw = Vec::with_capacity(tl.len());
        for (u, l) in lv.t_roots.iter().zip(&tl) {
            tw.push(weight(l + shift, *u)?);
        }
        s_w.push(sw);
        t_w.push(tw);
    }

    let mut out = NodeValues {
        edge: levels.iter().map(|l| l.edge).fold(0.0, f64::max),
        ..NodeValues::default()
    };

    if want.all || want.positive {
        // S_i: row block i (x = u), column block i−1 (y = −u)
        // T_i: row block i−1 (x = −û), column block i (y = û)
        let mut p_set: Vec<Element> = Vec::new();
        let mut q_set: Vec<Element> = Vec::new();
        for i in 0..m {
            let lvl = i + 1;
            for (u, w) in levels[i].s_roots.iter().zip(&s_w[i]) {
                let e = Element { level: i, root: *u, x: *u, y: -u, row_block: lvl, col_block: lvl - 1, w: *w };
                if lvl % 2 == 0 { p_set.push(e) } else { q_set.push(e) }
            }
            for (u, w) in levels[i].t_roots.iter().zip(&t_w[i]) {
                let e = Element { level: i, root: *u, x: -u, y: *u, row_block: lvl - 1, col_block: lvl, w: *w };
                if lvl % 2 == 1 { p_set.push(e) } else { q_set.push(e) }
            }
        }
        out.elements = p_set.len() + q_set.len();
        let scale = p_set.iter().chain(&q_set).map(|e| e.root.norm()).fold(1.0, f64::max);
        let np = p_set.len();
        let nq = q_set.len();
        let mut a = vec![zero; np * nq];
        let mut b = vec![zero; nq * np];
        for (pi, pe) in p_set.iter().enumerate() {
            for (qi, qe) in q_set.iter().enumerate() {
                if pe.row_block == qe.col_block {
                    a[pi * nq + qi] = recip(pe.x + qe.y, scale)?;
                }
                if qe.row_block == pe.col_block {
                    b[qi * np + pi] = recip(qe.x + pe.y, scale)?;
                }
            }
        }
        let eval = |removed: u32| -> (Complex64, Complex64) {
            let keep_p: Vec<usize> = (0..np).filter(|&k| removed & (1 << p_set[k].level) == 0).collect();
            let keep_q: Vec<usize> = (0..nq).filter(|&k| removed & (1 << q_set[k].level) == 0).collect();
            let n = keep_p.len();
            let top = m - 1;
            // left[p][q] = ω_p A_pq ω_q and its ε-derivative
            let mut left = vec![zero; n * keep_q.len()];
            let mut dleft = vec![zero; n * keep_q.len()];
            for (r, &pk) in keep_p.iter().enumerate() {
                let pe = &p_set[pk];
                for (c, &qk) in keep_q.iter().enumerate() {
                    let qe = &q_set[qk];
                    let v = pe.w * a[pk * nq + qk] * qe.w;
                    left[r * keep_q.len() + c] = v;
                    if want.hat {
                        let mut d = zero;
                        if pe.level == top {
                            d += pe.root;
                        }
                        if qe.level == top {
                            d += qe.root;
                        }
                        dleft[r * keep_q.len() + c] = v * d;
                    }
                }
            }
            let mut mat = CMatrix::identity(n);
            let mut dmat = CMatrix::zeros(n);
            for r in 0..n {
                for (c, &pk) in keep_p.iter().enumerate() {
                    let mut s = zero;
                    let mut ds = zero;
                    for (k, &qk) in keep_q.iter().enumerate() {
                        let bv = b[qk * np + pk];
                        if bv == zero {
                            continue;
                        }
                        s += left[r * keep_q.len() + k] * bv;
                        if want.hat {
                            ds += dleft[r * keep_q.len() + k] * bv;
                        }
                    }
                    mat.data[r * n + c] += s;
                    dmat.data[r * n + c] = ds;
                }
            }
            if n == 0 {
                return (Complex64::new(1.0, 0.0), zero);
            }
            let lu = Lu::new(mat);
            let d = lu.det();
            let dh = if want.hat && !lu.is_singular() { d * lu.trace_solve(&dmat) } else { zero };
            (d, dh)
        };
        let (d_all, dhat_all) = eval(0);
        if want.all {
            out.d_all = d_all;
            out.dhat_all = dhat_all;
        }
        if want.positive {
            let mut d = zero;
            let mut dh = zero;
            for mask in 0u32..(1 << m) {
                let (v, vh) = if mask == 0 { (d_all, dhat_all) } else { eval(mask) };
                let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                d += sign * v;
                dh += sign * vh;
            }
            out.d_pos = d;
            out.dhat_pos = dh;
        }
    }

    if want.ones {
        let (d1, dh1) = ones_shell(levels, &s_w, &t_w)?;
        out.d_one = d1;
        out.dhat_one = dh1;
    }
    Ok(out)
}

/// The `n = (1, …, 1)` term as a transfer chain over pairs `(u_i, û_i)`.
fn ones_shell(
    levels: &[&LevelData],
    s_w: &[Vec<Complex64>],
    t_w: &[Vec<Complex64>],
) -> Result<(Complex64, Complex64)> {
    let m = levels.len();
    let zero = Complex64::new(0.0, 0.0);
    let scale = levels
        .iter()
        .flat_map(|l| l.s_roots.iter().chain(&l.t_roots))
        .map(|u| u.norm())
        .fold(1.0, f64::max);
    // v[a][b] over (S root a, T root b) at the current level
    let (su, tu) = (&levels[0].s_roots, &levels[0].t_roots);
    let mut v = vec![zero; su.len() * tu.len()];
    for (a, u) in su.iter().enumerate() {
        for (b, uh) in tu.iter().enumerate() {
            v[a * tu.len() + b] = -s_w[0][a] * t_w[0][b] * recip(u + uh, scale)?;
        }
    }
    for i in 1..m {
        let (su0, tu0) = (&levels[i - 1].s_roots, &levels[i - 1].t_roots);
        let (su1, tu1) = (&levels[i].s_roots, &levels[i].t_roots);
        let (na, nb) = (su0.len(), tu0.len());
        let (na1, nb1) = (su1.len(), tu1.len());
        // first product of the 2×2 Cauchy block factorises
        let mut closed = zero;
        for a in 0..na {
            for b in 0..nb {
                closed += v[a * nb + b] * recip(su0[a] + tu0[b], scale)?;
            }
        }
        // second product: Σ_{a,b} v[a][b] / ((u_a − u'_{a'})(û_b − û'_{b'}))
        let mut g = vec![zero; na * na1];
        for a in 0..na {
            for a1 in 0..na1 {
                g[a * na1 + a1] = recip(su0[a] - su1[a1], scale)?;
            }
        }
        let mut hm = vec![zero; nb * nb1];
        for b in 0..nb {
            for b1 in 0..nb1 {
                hm[b * nb1 + b1] = recip(tu0[b] - tu1[b1], scale)?;
            }
        }
        // tmp[a][b1] = Σ_b v[a][b] hm[b][b1]
        let mut tmp = vec![zero; na * nb1];
        for a in 0..na {
            for b in 0..nb {
                let x = v[a * nb + b];
                if x == zero {
                    continue;
                }
                for b1 in 0..nb1 {
                    tmp[a * nb1 + b1] += x * hm[b * nb1 + b1];
                }
            }
        }
        let mut next = vec![zero; na1 * nb1];
        for a1 in 0..na1 {
            for b1 in 0..nb1 {
                let mut s = zero;
                for a in 0..na {
                    s += g[a * na1 + a1] * tmp[a * nb1 + b1];
                }
                let first = -closed * recip(tu1[b1] + su1[a1], scale)?;
                next[a1 * nb1 + b1] = s_w[i][a1] * t_w[i][b1] * (first - s);
            }
        }
        v = next;
    }
    let (su, tu) = (&levels[m - 1].s_roots, &levels[m - 1].t_roots);
    let mut d = zero;
    let mut dh = zero;
    for (a, u) in su.iter().enumerate() {
        for (b, uh) in tu.iter().enumerate() {
            let x = v[a * tu.len() + b];
            d += x * recip(u + uh, scale)?;
            dh += x;
        }
    }
    Ok((d, dh))
}

/// Convenience wrapper: builds every level at `params.z` and evaluates.
pub fn evaluate_params(params: &KernelParams, trunc: &TruncationSpec, want: Want) -> Result<NodeValues> {
    let data: Vec<LevelData> = (0..params.m())
        .map(|i| LevelData::build(params, i, params.z[i], trunc))
        .collect::<Result<_>>()?;
    let refs: Vec<&LevelData> = data.iter().collect();
    evaluate(&refs, want, trunc.tol)
}
