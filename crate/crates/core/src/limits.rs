//! Limit laws of the pinched-up field: the kernels `S_∞` and `S_r`, the
//! critical-period `w`-contour integral, and Gaussian-bridge probabilities
//! they reduce to.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::distribution::{Estimate, PeriodCase};
use crate::montecarlo::{estimate_limit_probability, RandomStream};
use crate::quad::{circle_angles, composite_mesh, gl16, pairwise_sum};
use crate::specfun::{gaussian_density, wrapped_gaussian, CirclePoint};
use crate::{Error, Result};

/// Time and level vectors of the `S` kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SArgs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl SArgs {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::SizeMismatch(format!("a has {} entries, b has {}", a.len(), b.len())));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("a and b must be finite".into()));
        }
        if !(a[0] > 0.0) || a.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!("a must be positive and strictly increasing, got {a:?}")));
        }
        Ok(Self { a, b })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    fn da(&self) -> Vec<f64> {
        increments(&self.a)
    }

    fn db(&self) -> Vec<f64> {
        increments(&self.b)
    }
}

fn increments(v: &[f64]) -> Vec<f64> {
    (0..v.len()).map(|i| if i == 0 { v[0] } else { v[i] - v[i - 1] }).collect()
}

fn sign(m: usize) -> f64 {
    if m % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Line abscissas `1 + (m − i)/2`, `i = 1..m`.
pub fn default_abscissas(m: usize) -> Vec<f64> {
    (0..m).map(|i| 1.0 + (m - 1 - i) as f64 * 0.5).collect()
}

/// A complex number from a quadrature with its imaginary residual split off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineValue {
    pub value: f64,
    pub imag: f64,
}

/// Kernel between consecutive levels of a vertical-line integral.
#[derive(Clone, Copy)]
enum Link {
    /// `1/(ξ_i − ξ_{i−1})`
    Pole,
    /// `(1 − e^{r(ξ_i − ξ_{i−1})})/(ξ_i − ξ_{i−1})`
    Box(f64),
}

fn link(kind: Link, d: Complex64) -> Complex64 {
    match kind {
        Link::Pole => 1.0 / d,
        Link::Box(r) => {
            if d.norm() < 1e-8 {
                // series of (1 − e^{rd})/d near d = 0
                -r * (1.0 + r * d / 2.0 + r * r * d * d / 6.0)
            } else {
                (1.0 - (r * d).exp()) / d
            }
        }
    }
}

fn line_integral(args: &SArgs, abscissas: &[f64], kind: Link) -> Result<LineValue> {
    let m = args.m();
    if abscissas.len() != m {
        return Err(Error::SizeMismatch(format!("{} abscissas for {m} lines", abscissas.len())));
    }
    if let Link::Pole = kind {
        if abscissas.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::ContourOrder(format!("abscissas must be strictly decreasing, got {abscissas:?}")));
        }
    } else if abscissas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::ContourOrder(format!("lines must be distinct, got {abscissas:?}")));
    }
    let da = args.da();
    let db = args.db();
    let min_da = da.iter().cloned().fold(f64::INFINITY, f64::min);
    let half = 8.0 / min_da.sqrt();
    let gap = abscissas.windows(2).map(|w| (w[0] - w[1]).abs()).fold(f64::INFINITY, f64::min);
    // step small against both the nearest pole and the Gaussian width
    let step = (gap / 5.0).min(0.25 / da.iter().cloned().fold(0.0, f64::max).sqrt());
    let n = 400usize.max((2.0 * half / step).ceil() as usize);
    let h = 2.0 * half / n as f64;
    let ys: Vec<f64> = (0..=n).map(|j| -half + j as f64 * h).collect();
    let xi = |i: usize, y: f64| Complex64::new(abscissas[i], y);
    let weight = |i: usize, y: f64| -> Complex64 {
        let z = xi(i, y);
        (da[i] * z * z - db[i] * z).exp()
    };
    let mut f: Vec<Complex64> = ys.iter().map(|&y| weight(0, y) * h / (2.0 * PI)).collect();
    for i in 1..m {
        let next: Vec<Complex64> = ys
            .iter()
            .map(|&y| {
                let z = xi(i, y);
                let terms: Vec<Complex64> =
                    ys.iter().zip(&f).map(|(&y0, &v)| v * link(kind, z - xi(i - 1, y0))).collect();
                pairwise_sum(&terms) * weight(i, y) * h / (2.0 * PI)
            })
            .collect();
        f = next;
    }
    let v = pairwise_sum(&f) * sign(m) * 2f64.sqrt();
    Ok(LineValue { value: v.re, imag: v.im })
}

/// `S_∞(a, b)` by the trapezoid rule on vertical lines `Re ξ_i = abscissas[i]`
/// truncated at `|Im ξ| ≤ 8/√(min Δa)`.
pub fn s_inf_quadrature(args: &SArgs, abscissas: Option<&[f64]>) -> Result<LineValue> {
    let default = default_abscissas(args.m());
    line_integral(args, abscissas.unwrap_or(&default), Link::Pole)
}

/// Joint density-weighted probability of a Brownian motion staying in boxes.
///
/// Returns `∫ 1{x_i ∈ [lo_i, hi_i], i < m} · density of (B(a_1), …, B(a_m))
/// at (x_1, …, x_{m−1}, end)`.
fn box_chain(a: &[f64], lo: &[f64], hi: &[f64], end: f64) -> f64 {
    let m = a.len();
    if m == 1 {
        return gaussian_density(end, a[0]);
    }
    let da = increments(a);
    let spread = 10.0 * a[m - 1].sqrt();
    let rule = gl16();
    let meshes: Vec<(Vec<f64>, Vec<f64>)> = (0..m - 1)
        .map(|i| {
            let l = lo[i].max(lo[i].min(end).min(0.0) - spread);
            let u = hi[i].min(lo[i].max(end).max(0.0) + spread);
            let width = 0.5 * da[i].min(da[i + 1]).sqrt();
            if u > l {
                composite_mesh(rule, l, u, width)
            } else {
                (vec![], vec![])
            }
        })
        .collect();
    let (x0, w0) = &meshes[0];
    let mut g: Vec<f64> = x0.iter().zip(w0).map(|(x, w)| w * gaussian_density(*x, a[0])).collect();
    for i in 1..m - 1 {
        let (x1, w1) = &meshes[i];
        let (xp, _) = &meshes[i - 1];
        g = x1
            .iter()
            .zip(w1)
            .map(|(y, w)| {
                let s: f64 = xp.iter().zip(&g).map(|(x, gv)| gv * gaussian_density(y - x, da[i])).sum();
                s * w
            })
            .collect();
    }
    let (xl, _) = &meshes[m - 2];
    xl.iter().zip(&g).map(|(x, gv)| gv * gaussian_density(end - x, da[m - 1])).sum()
}

/// `S_∞(a, b)` as `P(B(a_i) ≥ b_i/√2, i < m | B(a_m) = b_m/√2) φ_{a_m}(b_m/√2)`
/// by iterated Gauss–Legendre quadrature. Supports `m ≤ 4`.
pub fn s_inf_probabilistic(args: &SArgs) -> Result<f64> {
    let m = args.m();
    if m > 4 {
        return Err(Error::Unsupported(format!("bridge quadrature supports m ≤ 4, got {m}")));
    }
    let s = 2f64.sqrt();
    let lo: Vec<f64> = args.b.iter().map(|b| b / s).collect();
    let hi = vec![f64::INFINITY; m];
    Ok(box_chain(&args.a, &lo, &hi, args.b[m - 1] / s))
}

/// Root-sum kernel `S_r(a, b; w)` with roots `ξ_i(k) = (−Log w_i + 2πik)/r`,
/// `|k| ≤ K`. Returns the value and the magnitude of the outermost `|k| = K`
/// contributions.
pub fn s_r_sum(args: &SArgs, r: f64, w: &[Complex64], k: Option<usize>) -> Result<(Complex64, f64)> {
    let m = args.m();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    if w.len() != m {
        return Err(Error::SizeMismatch(format!("{} points w for {m} levels", w.len())));
    }
    if w.iter().any(|v| !(v.norm() > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("w must be nonzero".into()));
    }
    let da = args.da();
    let db = args.db();
    let kk = k.unwrap_or_else(|| default_root_cutoff(&da, r)) as i64;
    let roots: Vec<Vec<Complex64>> = w
        .iter()
        .map(|wi| {
            let l = -wi.ln();
            (-kk..=kk).map(|j| (l + Complex64::new(0.0, 2.0 * PI * j as f64)) / r).collect()
        })
        .collect();
    let weight = |i: usize, z: Complex64| (da[i] * z * z - db[i] * z).exp();
    let mut f: Vec<Complex64> = roots[0].iter().map(|z| weight(0, *z)).collect();
    for i in 1..m {
        let mut next = Vec::with_capacity(roots[i].len());
        for z in &roots[i] {
            let mut terms = Vec::with_capacity(f.len());
            for (z0, v) in roots[i - 1].iter().zip(&f) {
                let d = z - z0;
                if d.norm() < 1e-13 * z.norm().max(1.0) {
                    return Err(Error::SingularDenominator { row: i - 1, col: i, magnitude: d.norm() });
                }
                terms.push(v / d);
            }
            next.push(pairwise_sum(&terms) * weight(i, *z));
        }
        f = next;
    }
    let pre = sign(m) * 2f64.sqrt() / r.powi(m as i32);
    let last = f.len() - 1;
    let edge = (f[0].norm() + f[last].norm()) * pre.abs();
    Ok((pairwise_sum(&f) * pre, edge))
}

/// `|k|` cutoff at which `e^{−Δa (2πk/r)²}` drops below `e^{−40}`.
fn default_root_cutoff(da: &[f64], r: f64) -> usize {
    let min_da = da.iter().cloned().fold(f64::INFINITY, f64::min);
    (r * (40.0 / min_da).sqrt() / (2.0 * PI)).ceil() as usize + 2
}

/// Radii `|w_i| = e^{−r(1 + (m − i)/2)}`, whose root lines sit on
/// [`default_abscissas`].
pub fn default_w_radii(m: usize, r: f64) -> Vec<f64> {
    default_abscissas(m).iter().map(|c| (-r * c).exp()).collect()
}

/// Trapezoid count on each `w`-circle that resolves the Gaussian factors of
/// the root sums.
pub fn default_w_nodes(a: &[f64], r: f64) -> usize {
    let max_da = increments(a).iter().cloned().fold(0.0, f64::max);
    let n = (32.0 * max_da.sqrt() / r).ceil() as usize;
    (n.max(64) + 1) & !1
}

/// `(2πi)^{−m} ∮ S_r(a, c−b; w) S_r(a, c+b; w) ∏_{i≥2}(1 − w_{i−1}/w_i) ∏ dw_i/w_i`
/// on circles of radii `wradii` (strictly increasing, inside the unit disk).
pub fn critical_limit_integral(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    r: f64,
    wradii: &[f64],
    nodes: usize,
    k: Option<usize>,
) -> Result<Estimate> {
    let m = a.len();
    if b.len() != m || c.len() != m || wradii.len() != m {
        return Err(Error::SizeMismatch("a, b, c and the radii must have equal lengths".into()));
    }
    if wradii.iter().any(|x| !(*x > 0.0 && *x < 1.0)) || wradii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::ContourOrder(format!("w radii must increase strictly inside (0, 1), got {wradii:?}")));
    }
    if nodes < 16 || nodes % 2 != 0 {
        return Err(Error::InvalidArgument(format!("nodes must be even and at least 16, got {nodes}")));
    }
    let minus = SArgs::new(a.to_vec(), c.iter().zip(b).map(|(c, b)| c - b).collect())?;
    let plus = SArgs::new(a.to_vec(), c.iter().zip(b).map(|(c, b)| c + b).collect())?;
    let angles = circle_angles(nodes);
    let total = nodes.pow(m as u32);
    let evaluated: Vec<Result<(Complex64, f64)>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut w = Vec::with_capacity(m);
            for rad in wradii {
                w.push(Complex64::from_polar(*rad, angles[rest % nodes]));
                rest /= nodes;
            }
            let (s1, e1) = s_r_sum(&minus, r, &w, k)?;
            let (s2, e2) = s_r_sum(&plus, r, &w, k)?;
            let mut v = s1 * s2;
            for i in 1..m {
                v *= 1.0 - w[i - 1] / w[i];
            }
            Ok((v, e1 * s2.norm() + e2 * s1.norm()))
        })
        .collect();
    let mut vals = Vec::with_capacity(total);
    let mut sub = Vec::with_capacity(total >> m);
    let mut edge = 0.0f64;
    let mut max_abs = 0.0f64;
    for (idx, res) in evaluated.into_iter().enumerate() {
        let (v, e) = res?;
        if !v.is_finite() {
            return Err(Error::Range(v.norm()));
        }
        edge = edge.max(e);
        max_abs = max_abs.max(v.norm());
        vals.push(v);
        let mut rest = idx;
        if (0..m).all(|_| {
            let even = (rest % nodes) % 2 == 0;
            rest /= nodes;
            even
        }) {
            sub.push(v);
        }
    }
    let fine = pairwise_sum(&vals) / total as f64;
    let coarse = pairwise_sum(&sub) / sub.len() as f64;
    Ok(Estimate {
        value: fine.re,
        imag: fine.im,
        quad_proxy: (fine - coarse).norm().max(1e-15 * max_abs),
        trunc_proxy: edge,
        nodes: total,
    })
}

/// Right side of the critical identity at `m = 1`: `φ_a(c) φ_a^{(r)}({b})`.
pub fn critical_one_point(a: f64, b: f64, c: f64, r: f64) -> Result<f64> {
    Ok(gaussian_density(c, a) * wrapped_gaussian(CirclePoint::new(b, r)?, a, 1e-16)?)
}

/// Both sides of the finite-`r` box identity: the vertical-line integral with
/// kernel `(1 − e^{r(ξ_i − ξ_{i−1})})/(ξ_i − ξ_{i−1})`, and
/// `P(√2 B(a_i) − b_i ∈ [0, r), i < m | √2 B(a_m) = b_m) φ_{a_m}(b_m/√2)`.
pub fn finite_r_bridge_identity(args: &SArgs, r: f64, abscissas: Option<&[f64]>) -> Result<(LineValue, f64)> {
    let m = args.m();
    if m > 3 {
        return Err(Error::Unsupported(format!("box identity supports m ≤ 3, got {m}")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    let default = default_abscissas(m);
    let lhs = line_integral(args, abscissas.unwrap_or(&default), Link::Box(r))?;
    let s = 2f64.sqrt();
    let lo: Vec<f64> = args.b.iter().map(|b| b / s).collect();
    let hi: Vec<f64> = args.b.iter().map(|b| (b + r) / s).collect();
    let rhs = box_chain(&args.a, &lo, &hi, args.b[m - 1] / s);
    Ok((lhs, rhs))
}

/// `P(B^br(t_i) ≥ h_i for all i)` for a standard Brownian bridge.
pub fn bridge_orthant(t: &[f64], h: &[f64]) -> Result<f64> {
    let m = t.len() + 1;
    if m > 4 {
        return Err(Error::Unsupported(format!("bridge quadrature supports at most 3 times, got {}", m - 1)));
    }
    if m == 2 {
        // B^br(t) ~ N(0, t(1 − t))
        let s = (t[0] * (1.0 - t[0])).sqrt();
        return Ok(0.5 * erfc(h[0] / (s * 2f64.sqrt())));
    }
    let mut a = t.to_vec();
    a.push(1.0);
    let mut lo = h.to_vec();
    lo.push(0.0);
    let hi = vec![f64::INFINITY; m];
    Ok(box_chain(&a, &lo, &hi, 0.0) / gaussian_density(0.0, 1.0))
}

fn check_query(x: &[f64], t: &[f64], h: &[f64]) -> Result<()> {
    if x.len() != t.len() || h.len() != t.len() {
        return Err(Error::SizeMismatch("x, t, h must have equal lengths".into()));
    }
    if t.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!("times must be strictly increasing in (0, 1), got {t:?}")));
    }
    Ok(())
}

/// Paths used when the quadrature dimension is too high.
pub const FALLBACK_PATHS: usize = 100_000;

/// Limit of the pinched-up conditional probability
/// `P(∩_i {field(x_i, t_i) ≥ h_i})` for the given period regime. `r` is the
/// circle length for the critical regime. Up to two conditioning times are
/// done by quadrature; beyond that the value is a Monte Carlo estimate with
/// [`FALLBACK_PATHS`] paths on stream `(0, 0)`.
pub fn limit_conditional_cdf(case: PeriodCase, x: &[f64], t: &[f64], h: &[f64], r: Option<f64>) -> Result<f64> {
    check_query(x, t, h)?;
    if t.is_empty() {
        return Ok(1.0);
    }
    if t.len() > 2 {
        let stream = RandomStream::new(0, 0);
        return Ok(estimate_limit_probability(case, x, t, h, r, FALLBACK_PATHS, &stream)?.value);
    }
    let s = 2f64.sqrt();
    match case {
        PeriodCase::Large => {
            // two independent bridges B'_1, B'_2 with thresholds (h ∓ x)/√2
            let lo1: Vec<f64> = h.iter().zip(x).map(|(h, x)| (h - x) / s).collect();
            let lo2: Vec<f64> = h.iter().zip(x).map(|(h, x)| (h + x) / s).collect();
            Ok(bridge_orthant(t, &lo1)? * bridge_orthant(t, &lo2)?)
        }
        PeriodCase::Small => bridge_orthant(t, h),
        PeriodCase::Critical => {
            let r = r.ok_or_else(|| Error::InvalidArgument("the critical regime needs the circle length r".into()))?;
            let mut a = t.to_vec();
            a.push(1.0);
            let mut b = x.to_vec();
            b.push(0.0);
            let mut c = h.to_vec();
            c.push(0.0);
            let m = a.len();
            let num = critical_limit_integral(&a, &b, &c, r, &default_w_radii(m, r), default_w_nodes(&a, r), None)?;
            let den = critical_limit_integral(&[1.0], &[0.0], &[0.0], r, &default_w_radii(1, r), default_w_nodes(&[1.0], r), None)?;
            Ok(num.value / den.value)
        }
    }
}
