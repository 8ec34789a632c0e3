//! Exact distribution functions of the periodic KPZ fixed point as contour
//! integrals over nested circles.
//!
//! Two orderings of the circles appear. The "mixed" probability
//! `P(H_i ≥ β_i for i < m, H_m ≤ β_m)` and its `β_m`-derivative use
//! `|z_1| < … < |z_m|`; the plain joint CDF `P(H_i ≤ β_i ∀i)` uses the same
//! integrand with `|z_m| < … < |z_1|`.

mod grid;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fredholm::det::Want;
use crate::fredholm::{prefactor_c, CVariant, KernelParams, SeriesKind, TruncationSpec};
use crate::specfun::{a1, ComplexDisk};
use crate::{Error, Result};
use grid::{integrate, NodeOut};

/// Argument of `F_m`: one `(γ_i, τ_i, β_i)` triple per point, plus the period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    pub gamma: Vec<f64>,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: f64,
}

impl EvaluationPoint {
    pub fn new(gamma: Vec<f64>, tau: Vec<f64>, beta: Vec<f64>, p: f64) -> Result<Self> {
        let m = tau.len();
        if m == 0 {
            return Err(Error::InvalidArgument("at least one point is required".into()));
        }
        if gamma.len() != m || beta.len() != m {
            return Err(Error::SizeMismatch(format!(
                "gamma, tau, beta have lengths {}, {m}, {}",
                gamma.len(),
                beta.len()
            )));
        }
        if gamma.iter().chain(&tau).chain(&beta).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("period must be positive, got {p}")));
        }
        if !(tau[0] > 0.0) || tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!("times must be positive and strictly increasing, got {tau:?}")));
        }
        Ok(Self { gamma, tau, beta, p })
    }

    /// Single point `(γ, τ, β)`.
    pub fn one(gamma: f64, tau: f64, beta: f64, p: f64) -> Result<Self> {
        Self::new(vec![gamma], vec![tau], vec![beta], p)
    }

    pub fn m(&self) -> usize {
        self.tau.len()
    }

    fn kernel(&self, radii: &[f64]) -> Result<KernelParams> {
        let z = radii.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        KernelParams::new(self.gamma.clone(), self.tau.clone(), self.beta.clone(), self.p, z)
    }
}

/// How the circle radii are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Radii {
    /// explicit radii `r_1 < … < r_m` in `(0, 1)`
    Raw(Vec<f64>),
    /// `|z_i| = e^{−ℓp/2 − ρ_i p ℓ^{1/4}}` with `ρ_1 > … > ρ_m > 0`
    Family { ell: f64, p: f64, rho: Vec<f64> },
}

/// Circles and the number of trapezoid nodes on each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radii: Radii,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn raw(radii: Vec<f64>, nodes: usize) -> Result<Self> {
        let c = Self { radii: Radii::Raw(radii), nodes };
        c.validate()?;
        Ok(c)
    }

    /// Geometric radii `0.05·2^{i−1}`, kept below `0.9`.
    pub fn geometric(m: usize, nodes: usize) -> Result<Self> {
        let mut radii = Vec::with_capacity(m);
        let mut r: f64 = 0.05;
        for _ in 0..m {
            radii.push(r);
            r = (2.0 * r).min(0.5 * (r + 0.9));
        }
        Self::raw(radii, nodes)
    }

    /// The family used for pinched-up queries, `ρ_i = 1 − (i − 1)/4` clipped
    /// to stay positive.
    pub fn family(ell: f64, p: f64, m: usize, nodes: usize) -> Result<Self> {
        let mut rho = Vec::with_capacity(m);
        let step = if m > 4 { 1.0 / m as f64 } else { 0.25 };
        for i in 0..m {
            rho.push(1.0 - i as f64 * step);
        }
        let c = Self { radii: Radii::Family { ell, p, rho }, nodes };
        c.validate()?;
        Ok(c)
    }

    pub fn m(&self) -> usize {
        match &self.radii {
            Radii::Raw(r) => r.len(),
            Radii::Family { rho, .. } => rho.len(),
        }
    }

    /// Radii in increasing order.
    pub fn moduli(&self) -> Vec<f64> {
        match &self.radii {
            Radii::Raw(r) => r.clone(),
            Radii::Family { ell, p, rho } => {
                rho.iter().map(|r| (-ell * p / 2.0 - r * p * ell.powf(0.25)).exp()).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 || self.nodes % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "nodes per circle must be even and at least 16, got {}",
                self.nodes
            )));
        }
        if let Radii::Family { ell, p, rho } = &self.radii {
            if !(*ell > 0.0 && *p > 0.0) {
                return Err(Error::Domain(format!("level and period must be positive, got {ell}, {p}")));
            }
            if rho.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::ContourOrder(format!("rho must be positive, got {rho:?}")));
            }
        }
        let r = self.moduli();
        if r.is_empty() {
            return Err(Error::InvalidArgument("no circles".into()));
        }
        if r.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(Error::ContourOrder(format!("radii must lie in (0, 1), got {r:?}")));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::ContourOrder(format!("radii must be strictly increasing, got {r:?}")));
        }
        Ok(())
    }

    fn check_m(&self, m: usize) -> Result<()> {
        self.validate()?;
        if self.m() != m {
            return Err(Error::SizeMismatch(format!("{} circles for {m} points", self.m())));
        }
        Ok(())
    }
}

/// A real quantity from a contour integral together with its error proxies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// imaginary part of the computed integral
    pub imag: f64,
    /// change when the node count is halved
    pub quad_proxy: f64,
    /// size of the neglected outermost roots (or last shell)
    pub trunc_proxy: f64,
    /// quadrature nodes evaluated
    pub nodes: usize,
}

impl Estimate {
    pub fn proxy(&self) -> f64 {
        self.quad_proxy + self.trunc_proxy
    }

    /// Fails with a truncation error if the combined proxy exceeds `threshold`.
    pub fn check(&self, threshold: f64) -> Result<()> {
        if self.proxy() > threshold {
            return Err(Error::Truncation { proxy: self.proxy(), threshold });
        }
        Ok(())
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            imag: self.imag * s,
            quad_proxy: self.quad_proxy * s.abs(),
            trunc_proxy: self.trunc_proxy * s.abs(),
            nodes: self.nodes,
        }
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12e} (im {:.1e}, quad {:.1e}, trunc {:.1e})", self.value, self.imag, self.quad_proxy, self.trunc_proxy)
    }
}

fn estimate(sum: &grid::GridSum, k: usize, sign: f64) -> Estimate {
    let v = sum.fine[k] * sign;
    Estimate { value: v.re, imag: v.im, quad_proxy: sum.quad_proxy(k), trunc_proxy: sum.trunc, nodes: sum.nodes }
}

fn in_unit_range(e: Estimate) -> Result<Estimate> {
    let eps = e.proxy().max(1e-12);
    if e.value < -eps || e.value > 1.0 + eps {
        return Err(Error::OutOfRange { value: e.value, lo: -eps, hi: 1.0 + eps });
    }
    Ok(e)
}

fn c_at(params: &KernelParams, tol: f64) -> Result<Complex64> {
    prefactor_c(params, CVariant::C, tol)
}

fn all_orders() -> Want {
    Want { all: true, ..Want::default() }
}

/// `P(H_p(γ_i, τ_i) ≤ β_i for all i)`, with the circles of `contour` taken
/// in reverse order (`|z_m|` smallest).
pub fn joint_cdf(pt: &EvaluationPoint, contour: &ContourSpec, trunc: &TruncationSpec) -> Result<Estimate> {
    contour.check_m(pt.m())?;
    let mut radii = contour.moduli();
    radii.reverse();
    let template = pt.kernel(&radii)?;
    let tol = trunc.tol;
    let sum = integrate(&template, &radii, contour.nodes, trunc, 1, |node| {
        let c = c_at(&node.params, tol)?;
        let (v, tr) = node.series(all_orders())?;
        Ok(NodeOut { values: vec![c * v.d_all], trunc: tr * c.norm() })
    })?;
    in_unit_range(estimate(&sum, 0, 1.0))
}

/// `P(H_p(γ_i, τ_i) ≥ β_i for i < m, H_p(γ_m, τ_m) ≤ β_m)`.
pub fn mixed_probability(pt: &EvaluationPoint, contour: &ContourSpec, trunc: &TruncationSpec) -> Result<Estimate> {
    contour.check_m(pt.m())?;
    let radii = contour.moduli();
    let template = pt.kernel(&radii)?;
    let tol = trunc.tol;
    let sign = if pt.m() % 2 == 1 { 1.0 } else { -1.0 };
    let sum = integrate(&template, &radii, contour.nodes, trunc, 1, |node| {
        let c = c_at(&node.params, tol)?;
        let (v, tr) = node.series(all_orders())?;
        Ok(NodeOut { values: vec![c * v.d_all], trunc: tr * c.norm() })
    })?;
    in_unit_range(estimate(&sum, 0, sign))
}

/// `∂/∂β_m` of [`mixed_probability`]. At `m = 1` this is the one-point
/// density of `H_p(γ, τ)` at `β`.
pub fn cdf_derivative(pt: &EvaluationPoint, contour: &ContourSpec, trunc: &TruncationSpec) -> Result<Estimate> {
    contour.check_m(pt.m())?;
    let radii = contour.moduli();
    let template = pt.kernel(&radii)?;
    let tol = trunc.tol;
    let m = pt.m();
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let want = Want { positive: true, hat: true, ..Want::default() };
    let sum = integrate(&template, &radii, contour.nodes, trunc, 1, |node| {
        let c = c_at(&node.params, tol)?;
        let am = a1(ComplexDisk::new(node.z()[m - 1])?)?;
        let (v, tr) = node.series(want)?;
        Ok(NodeOut { values: vec![c * (am * v.d_pos + v.dhat_pos)], trunc: tr * c.norm() })
    })?;
    Ok(estimate(&sum, 0, sign / pt.p.sqrt()))
}

/// Residuals of the two integrals `∮ A_1(z_m) C D_n` and `∮ C D̂_n` that
/// vanish when some `n_k = 0`; returns the larger magnitude.
pub fn vanishing_check(
    pt: &EvaluationPoint,
    contour: &ContourSpec,
    trunc: &TruncationSpec,
    n: &[usize],
) -> Result<VanishingResidual> {
    contour.check_m(pt.m())?;
    let m = pt.m();
    if n.len() != m {
        return Err(Error::SizeMismatch(format!("order vector has {} entries for {m} points", n.len())));
    }
    if !n.contains(&0) {
        return Err(Error::InvalidArgument(format!("order vector {n:?} has no zero component")));
    }
    let radii = contour.moduli();
    let template = pt.kernel(&radii)?;
    let tol = trunc.tol;
    let sum = integrate(&template, &radii, contour.nodes, trunc, 2, |node| {
        let c = c_at(&node.params, tol)?;
        let am = a1(ComplexDisk::new(node.z()[m - 1])?)?;
        let d = node.shell(n, SeriesKind::D)?;
        let dh = if n[m - 1] == 0 { Complex64::new(0.0, 0.0) } else { node.shell(n, SeriesKind::DHat)? };
        Ok(NodeOut { values: vec![am * c * d, c * dh], trunc: 0.0 })
    })?;
    Ok(VanishingResidual {
        first: sum.fine[0].norm(),
        second: sum.fine[1].norm(),
        scale: sum.max_abs[0].max(sum.max_abs[1]),
        quad_proxy: sum.quad_proxy(0).max(sum.quad_proxy(1)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanishingResidual {
    /// `|∮ A_1(z_m) C D_n|`
    pub first: f64,
    /// `|∮ C D̂_n|`
    pub second: f64,
    /// largest integrand magnitude on the grid
    pub scale: f64,
    pub quad_proxy: f64,
}

impl VanishingResidual {
    pub fn max(&self) -> f64 {
        self.first.max(self.second)
    }
}

/// Pinched-up query: events `(H(x_i ℓ^{−1/4}, t_i) − t_i ℓ)/ℓ^{1/4} ≥ h_i`
/// for `i < m`, conditioned on `H_p(0, 1) = ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalQuery {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub ell: f64,
    pub p: f64,
}

impl ConditionalQuery {
    pub fn new(x: Vec<f64>, t: Vec<f64>, h: Vec<f64>, ell: f64, p: f64) -> Result<Self> {
        if x.len() != t.len() || h.len() != t.len() {
            return Err(Error::SizeMismatch(format!(
                "x, t, h have lengths {}, {}, {}",
                x.len(),
                t.len(),
                h.len()
            )));
        }
        if x.iter().chain(&t).chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("query entries must be finite".into()));
        }
        if t.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!("times must be strictly increasing in (0, 1), got {t:?}")));
        }
        if !(ell > 0.0 && ell.is_finite()) || !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("level and period must be positive, got {ell}, {p}")));
        }
        Ok(Self { x, t, h, ell, p })
    }

    /// Total number of points including the conditioning one.
    pub fn m(&self) -> usize {
        self.t.len() + 1
    }

    /// `(γ, τ, β)` with the conditioning point `(0, 1, 0)` appended.
    pub fn point(&self) -> Result<EvaluationPoint> {
        let q = self.ell.powf(0.25);
        let mut gamma: Vec<f64> = self.x.iter().map(|x| x / q).collect();
        let mut tau = self.t.clone();
        let mut beta: Vec<f64> = self.t.iter().zip(&self.h).map(|(t, h)| t * self.ell + h * q).collect();
        gamma.push(0.0);
        tau.push(1.0);
        beta.push(self.ell);
        EvaluationPoint::new(gamma, tau, beta, self.p)
    }

    fn denominator(&self) -> Result<Self> {
        Self::new(vec![], vec![], vec![], self.ell, self.p)
    }
}

/// The four numerator terms `P_{m,1}, P_{m,2}, P̂_{m,1}, P̂_{m,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PTerms {
    pub p1: Estimate,
    pub p2: Estimate,
    pub phat1: Estimate,
    pub phat2: Estimate,
}

impl PTerms {
    pub fn total(&self) -> f64 {
        self.p1.value + self.p2.value + self.phat1.value + self.phat2.value
    }

    pub fn proxy(&self) -> f64 {
        self.p1.proxy() + self.p2.proxy() + self.phat1.proxy() + self.phat2.proxy()
    }

    pub fn imag(&self) -> f64 {
        self.p1.imag.abs() + self.p2.imag.abs() + self.phat1.imag.abs() + self.phat2.imag.abs()
    }
}

/// The four terms for the query's `m` points on the given circles.
pub fn p_terms(q: &ConditionalQuery, contour: &ContourSpec, trunc: &TruncationSpec) -> Result<PTerms> {
    let pt = q.point()?;
    let m = pt.m();
    contour.check_m(m)?;
    let radii = contour.moduli();
    let template = pt.kernel(&radii)?;
    let tol = trunc.tol;
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let want = Want { positive: true, ones: true, hat: true, ..Want::default() };
    let sum = integrate(&template, &radii, contour.nodes, trunc, 4, |node| {
        let c = c_at(&node.params, tol)?;
        let am = a1(ComplexDisk::new(node.z()[m - 1])?)?;
        let (v, tr) = node.series(want)?;
        Ok(NodeOut {
            values: vec![
                am * c * v.d_one,
                am * c * (v.d_pos - v.d_one),
                c * v.dhat_one,
                c * (v.dhat_pos - v.dhat_one),
            ],
            trunc: tr * c.norm(),
        })
    })?;
    Ok(PTerms {
        p1: estimate(&sum, 0, sign),
        p2: estimate(&sum, 1, sign),
        phat1: estimate(&sum, 2, sign),
        phat2: estimate(&sum, 3, sign),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalResult {
    pub value: f64,
    /// error proxy of the ratio from those of its parts
    pub proxy: f64,
    pub imag: f64,
    pub numerator: PTerms,
    pub denominator: PTerms,
}

/// Conditional probability of the query's events given `H_p(0, 1) = ℓ`, as
/// the ratio of `β_m`-derivatives.
pub fn conditional_probability(
    q: &ConditionalQuery,
    contour: &ContourSpec,
    trunc: &TruncationSpec,
) -> Result<ConditionalResult> {
    let dq = q.denominator()?;
    let dc = ContourSpec { radii: first_circle(&contour.radii), nodes: contour.nodes };
    let den = p_terms(&dq, &dc, trunc)?;
    let num = if q.m() == 1 { den } else { p_terms(q, contour, trunc)? };
    let d = den.total();
    let dp = den.proxy();
    if !(d.abs() > 1e2 * dp) {
        return Err(Error::IllConditioned(format!("denominator {d:e} is within 100x of its error proxy {dp:e}")));
    }
    let n = num.total();
    let value = n / d;
    let proxy = num.proxy() / d.abs() + value.abs() * dp / d.abs();
    let imag = num.imag() / d.abs() + value.abs() * den.imag() / d.abs();
    if !(proxy < 0.5) {
        return Err(Error::IllConditioned(format!("ratio {value:e} carries error proxy {proxy:e}")));
    }
    let eps = proxy.max(1e-12);
    if value < -eps || value > 1.0 + eps {
        return Err(Error::OutOfRange { value, lo: -eps, hi: 1.0 + eps });
    }
    Ok(ConditionalResult { value, proxy, imag, numerator: num, denominator: den })
}

fn first_circle(r: &Radii) -> Radii {
    match r {
        Radii::Raw(v) => Radii::Raw(vec![v[0]]),
        Radii::Family { ell, p, rho } => Radii::Family { ell: *ell, p: *p, rho: vec![rho[0]] },
    }
}

/// Period regime of a pinched-up query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodCase {
    /// `p ≫ ℓ^{−1/4}`
    Large,
    /// `p = ρ̃ ℓ^{−1/4}`
    Critical,
    /// `p ≪ ℓ^{−1/4}`
    Small,
}

impl PeriodCase {
    /// Normalisation that makes `P̂_{m,1}` converge as `ℓ → ∞`.
    pub fn scale(self, ell: f64, p: f64) -> f64 {
        let growth = (4.0 / 3.0 * ell.powf(1.5)).exp();
        match self {
            PeriodCase::Large | PeriodCase::Critical => 4.0 * ell / p.sqrt() * growth,
            PeriodCase::Small => 2f64.powf(1.5) * ell.powf(1.25) * p.sqrt() * growth,
        }
    }
}

/// `P̂_{m,1}` multiplied by the normalisation of `case`.
pub fn scaled_p_hat_m1(
    q: &ConditionalQuery,
    contour: &ContourSpec,
    trunc: &TruncationSpec,
    case: PeriodCase,
) -> Result<Estimate> {
    let terms = p_terms(q, contour, trunc)?;
    Ok(terms.phat1.scaled(case.scale(q.ell, q.p)))
}
