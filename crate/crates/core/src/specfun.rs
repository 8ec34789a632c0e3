//! Complex special functions: polylogarithms on the unit disk, the kernel
//! exponents `A1`, `A2`, `B`, the boundary-layer integral `h(w, z)`, the
//! wrapped Gaussian heat kernel on a circle and the theta sum `c(ρ)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::quad::{gl16, KahanSum};
use crate::{Error, Result};

const TERM_CAP: usize = 10_000_000;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// A complex number strictly inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDisk(Complex64);

impl ComplexDisk {
    pub fn new(value: Complex64) -> Result<Self> {
        if !(value.norm() < 1.0) {
            return Err(Error::Domain(format!(
                "|z| = {} is not inside the open unit disk",
                value.norm()
            )));
        }
        Ok(Self(value))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl TryFrom<Complex64> for ComplexDisk {
    type Error = Error;

    fn try_from(value: Complex64) -> Result<Self> {
        Self::new(value)
    }
}

/// A point of the circle `ℝ/ρℤ`, stored by its representative in `[0, ρ)`.
#[derive(Debug, Clone, Copy)]
pub struct CirclePoint {
    rep: f64,
    period: f64,
}

impl CirclePoint {
    pub fn new(representative: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Domain(format!("circle period must be positive, got {period}")));
        }
        if !representative.is_finite() {
            return Err(Error::Domain("circle representative must be finite".into()));
        }
        let mut rep = representative.rem_euclid(period);
        if rep >= period {
            rep = 0.0;
        }
        Ok(Self { rep, period })
    }

    #[inline]
    pub fn representative(&self) -> f64 {
        self.rep
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }
}

impl PartialEq for CirclePoint {
    fn eq(&self, other: &Self) -> bool {
        if self.period != other.period {
            return false;
        }
        let slack = 1e-14 * self.period;
        let d = (self.rep - other.rep).abs();
        d <= slack || (self.period - d) <= slack
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}_{}", self.rep, self.period)
    }
}

/// Orders of the polylogarithm used by the formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolylogOrder {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl PolylogOrder {
    pub fn exponent(self) -> f64 {
        match self {
            PolylogOrder::Half => 0.5,
            PolylogOrder::ThreeHalves => 1.5,
            PolylogOrder::FiveHalves => 2.5,
        }
    }
}

/// `Li_s(z) = Σ_{n≥1} zⁿ/n^s` by compensated direct summation.
///
/// The loop stops once the geometric tail bound `|z|^{n+1}/(1 − |z|)` drops
/// below `tol`.
pub fn polylog(order: PolylogOrder, z: ComplexDisk, tol: f64) -> Result<Complex64> {
    let z = z.value();
    let r = z.norm();
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = order.exponent();
    let tail_scale = 1.0 / (1.0 - r);
    let mut acc = KahanSum::new();
    let mut power = z;
    let mut mag = r;
    for n in 1..=TERM_CAP {
        let nf = n as f64;
        let w = match order {
            PolylogOrder::Half => nf.sqrt(),
            PolylogOrder::ThreeHalves => nf * nf.sqrt(),
            PolylogOrder::FiveHalves => nf * nf * nf.sqrt(),
        };
        acc.add(power / w);
        mag *= r;
        if mag * tail_scale / (nf + 1.0).powf(s) < tol {
            return Ok(acc.value());
        }
        power *= z;
    }
    Err(Error::NonConvergence(format!(
        "polylog of order {s} at |z| = {r} did not reach tol {tol:e} within {TERM_CAP} terms"
    )))
}

/// `Li_{1/2}` for the small arguments met inside the `h` integrand.
#[inline]
fn li_half_small(zeta: Complex64, tol: f64) -> Complex64 {
    let r = zeta.norm();
    if r < 1e-300 {
        return Complex64::new(0.0, 0.0);
    }
    let tail_scale = 1.0 / (1.0 - r);
    let mut sum = zeta;
    let mut power = zeta;
    let mut mag = r;
    let mut n = 1usize;
    loop {
        mag *= r;
        if mag * tail_scale < tol || n >= TERM_CAP {
            return sum;
        }
        n += 1;
        power *= zeta;
        sum += power * inv_sqrt(n);
    }
}

#[inline]
fn inv_sqrt(n: usize) -> f64 {
    const TABLE: [f64; 9] = [
        0.0,
        1.0,
        std::f64::consts::FRAC_1_SQRT_2,
        0.577_350_269_189_625_8,
        0.5,
        0.447_213_595_499_958,
        0.408_248_290_463_863,
        0.377_964_473_009_227_2,
        0.353_553_390_593_273_8,
    ];
    if n < TABLE.len() {
        TABLE[n]
    } else {
        1.0 / (n as f64).sqrt()
    }
}

/// `A1(z) = −Li_{3/2}(z)/√(2π)`.
pub fn a1(z: ComplexDisk) -> Result<Complex64> {
    Ok(-polylog(PolylogOrder::ThreeHalves, z, crate::DEFAULT_TOL * 1e-3)? / SQRT_2PI)
}

/// `A2(z) = −Li_{5/2}(z)/√(2π)`.
pub fn a2(z: ComplexDisk) -> Result<Complex64> {
    Ok(-polylog(PolylogOrder::FiveHalves, z, crate::DEFAULT_TOL * 1e-3)? / SQRT_2PI)
}

/// `B(z, z') = (1/4π) Σ_{k,k'≥1} z^k z'^{k'} / ((k + k')√(kk'))`.
pub fn b_fun(z: ComplexDisk, zp: ComplexDisk) -> Result<Complex64> {
    b_fun_tol(z, zp, crate::DEFAULT_TOL * 1e-3)
}

/// [`b_fun`] with an explicit absolute tolerance.
pub fn b_fun_tol(z: ComplexDisk, zp: ComplexDisk, tol: f64) -> Result<Complex64> {
    let (z, zp) = (z.value(), zp.value());
    let (r, rp) = (z.norm(), zp.norm());
    if r == 0.0 || rp == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let tail = 1.0 / ((1.0 - r) * (1.0 - rp));
    let mut acc = KahanSum::new();
    let mut zk = z;
    let mut rk = r;
    let mut k = 1usize;
    while rk * rp * tail >= tol {
        let mut zkp = zp;
        let mut rkp = rp;
        let mut kp = 1usize;
        let sk = (k as f64).sqrt();
        while rk * rkp * tail >= tol {
            let denom = (k + kp) as f64 * sk * (kp as f64).sqrt();
            acc.add(zk * zkp / denom);
            zkp *= zp;
            rkp *= rp;
            kp += 1;
            if kp > TERM_CAP {
                return Err(Error::NonConvergence("B double series inner cap".into()));
            }
        }
        zk *= z;
        rk *= r;
        k += 1;
        if k > TERM_CAP {
            return Err(Error::NonConvergence("B double series outer cap".into()));
        }
    }
    Ok(acc.value() / (4.0 * PI))
}

/// `h(w, z) = −(1/√(2π)) ∫_{−∞}^{Re w} Li_{1/2}(z e^{(w² − (x + i Im w)²)/2}) dx` for `Re w < 0`.
///
/// With `x = Re w − s` the integrand becomes `Li_{1/2}(z e^{ws − s²/2})` on
/// `s ∈ [0, ∞)`; it is integrated with composite 16-point Gauss–Legendre
/// panels of width at most one, narrowed when `Im w` makes it oscillate.
pub fn h_left(w: Complex64, z: ComplexDisk, tol: f64) -> Result<Complex64> {
    if !(w.re < 0.0) {
        return Err(Error::Domain(format!("h_left needs Re(w) < 0, got {w}")));
    }
    Ok(h_left_unchecked(w, z.value(), tol))
}

/// `h(w, z)` for `Re w > 0`, defined through the symmetry `h(w, z) = h(−w, z)`.
pub fn h_right(w: Complex64, z: ComplexDisk, tol: f64) -> Result<Complex64> {
    if !(w.re > 0.0) {
        return Err(Error::Domain(format!("h_right needs Re(w) > 0, got {w}")));
    }
    h_left(-w, z, tol)
}

pub(crate) fn h_left_unchecked(w: Complex64, z: Complex64, tol: f64) -> Complex64 {
    let rz = z.norm();
    if rz == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = w.re;
    // magnitude of the integrand is at most ~ |z| e^{a s − s²/2}
    let mut width_guess: f64 = 8.0;
    let mut s_max = 0.0;
    for _ in 0..3 {
        let l = (rz * width_guess.max(1.0) / tol).ln().max(1.0);
        s_max = a + (a * a + 2.0 * l).sqrt();
        width_guess = s_max;
    }
    let panel = if w.im.abs() > 4.0 { 4.0 / w.im.abs() } else { 1.0 };
    let panels = ((s_max / panel).ceil() as usize).max(1);
    let step = s_max / panels as f64;
    let rule = gl16();
    let leaf_tol = (tol * 1e-2).max(1e-300);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = p as f64 * step;
        let half = 0.5 * step;
        let mid = lo + half;
        let mut part = Complex64::new(0.0, 0.0);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let s = mid + half * x;
            let zeta = z * (w * s - 0.5 * s * s).exp();
            part += li_half_small(zeta, leaf_tol) * *wt;
        }
        acc += part * half;
    }
    -acc / SQRT_2PI
}

/// Gaussian density `φ_t(x)` with variance `t`.
#[inline]
pub fn gaussian_density(x: f64, t: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Wrapped Gaussian `φ_t^{(ρ)}({x}) = Σ_{k∈ℤ} φ_t(x + kρ)`.
pub fn wrapped_gaussian(x: CirclePoint, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("wrapped Gaussian needs t > 0, got {t}")));
    }
    let rho = x.period();
    let x0 = x.representative();
    let mut sum = gaussian_density(x0, t);
    for dir in [1.0f64, -1.0] {
        let mut k = 1.0;
        loop {
            let y = x0 + dir * k * rho;
            let term = gaussian_density(y, t);
            sum += term;
            // terms are monotone once y moves away from the origin
            if term < tol * 1e-3 && y * dir > 0.0 {
                break;
            }
            k += 1.0;
        }
    }
    Ok(sum)
}

/// Arc distance on `ℝ/ρℤ`.
pub fn dist_circle(x: CirclePoint, y: CirclePoint) -> Result<f64> {
    if x.period() != y.period() {
        return Err(Error::InvalidArgument(format!(
            "circle periods differ: {} vs {}",
            x.period(),
            y.period()
        )));
    }
    let d = (x.representative() - y.representative()).abs();
    Ok(d.min(x.period() - d))
}

/// `dist_ρ(y, 0)` for a real representative `y`.
#[inline]
pub fn dist_to_origin(y: f64, rho: f64) -> f64 {
    let r = y.rem_euclid(rho);
    r.min(rho - r)
}

/// `c(ρ) = Σ_{k∈ℤ} e^{−ρ²k²/2}`.
pub fn c_of_rho(rho: f64, tol: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("c(ρ) needs ρ > 0, got {rho}")));
    }
    Ok(theta_sum(|k| (-rho * rho * k * k / 2.0).exp(), tol))
}

/// The Poisson-dual form `(√(2π)/ρ) Σ_{k∈ℤ} e^{−2π²k²/ρ²}` of [`c_of_rho`].
pub fn c_of_rho_dual(rho: f64, tol: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("c(ρ) needs ρ > 0, got {rho}")));
    }
    let scale = SQRT_2PI / rho;
    Ok(scale * theta_sum(|k| (-2.0 * PI * PI * k * k / (rho * rho)).exp(), tol / scale))
}

fn theta_sum<F: Fn(f64) -> f64>(term: F, tol: f64) -> f64 {
    let mut tail = Vec::new();
    let mut k = 1.0;
    loop {
        let t = term(k);
        tail.push(t);
        if t < tol * 1e-3 || k > 1e7 {
            break;
        }
        k += 1.0;
    }
    // smallest terms first
    let half: f64 = tail.iter().rev().sum();
    1.0 + 2.0 * half
}
