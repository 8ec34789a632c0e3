//! Closed forms and brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::function::erf::erfc;

pub fn phi(x: f64, t: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

pub fn wrapped(x: f64, t: f64, r: f64) -> f64 {
    (-60..=60).map(|k| phi(x + k as f64 * r, t)).sum()
}

pub fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / 2f64.sqrt())
}

pub fn dist(y: f64, r: f64) -> f64 {
    let u = y.rem_euclid(r);
    u.min(r - u)
}

pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for j in 1..n {
        s += f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `P(B(a1) ≥ y1 | B(a2) = y2) φ_{a2}(y2)` in closed form.
pub fn two_time_orthant(a: [f64; 2], y: [f64; 2]) -> f64 {
    let mu = a[0] / a[1] * y[1];
    let sd = (a[0] * (a[1] - a[0]) / a[1]).sqrt();
    upper_tail((y[0] - mu) / sd) * phi(y[1], a[1])
}

/// `P(B(a1) ≥ y1, B(a2) ≥ y2, B(a3) ∈ dy3)/dy3`, integrating out `B(a2)`.
pub fn three_time_orthant(a: [f64; 3], y: [f64; 3]) -> f64 {
    let sd = (a[0] * (a[1] - a[0]) / a[1]).sqrt();
    let f = |x: f64| phi(x, a[1]) * phi(y[2] - x, a[2] - a[1]) * upper_tail((y[0] - a[0] / a[1] * x) / sd);
    simpson(f, y[1], y[1] + 14.0 * a[1].sqrt() + y[2].abs(), 20_000)
}

/// `P(B(t1) ≥ 0, B(t2) ≥ 0)` for a standard bridge.
pub fn bridge_quadrant(t1: f64, t2: f64) -> f64 {
    let rho = (t1 * (1.0 - t2) / (t2 * (1.0 - t1))).sqrt();
    0.25 + rho.asin() / (2.0 * PI)
}

/// Right side of the critical identity at two times: a circle Brownian motion
/// through `b` and an independent line motion through `c`.
pub fn critical_two_point_oracle(a: [f64; 2], b: [f64; 2], c: [f64; 2], r: f64) -> f64 {
    let da = a[1] - a[0];
    let mu = c[1] * a[0] / a[1];
    let sd = (a[0] * da / a[1]).sqrt();
    let f = |y: f64| wrapped(y, a[0], r) * wrapped(b[1] - y, da, r) * upper_tail((c[0] + dist(y - b[0], r) - mu) / sd);
    // the integrand has kinks where dist(y − b1) is 0 or r/2
    let mut cuts = vec![0.0, r, b[0].rem_euclid(r), (b[0] + r / 2.0).rem_euclid(r)];
    cuts.sort_by(f64::total_cmp);
    let total: f64 = cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| simpson(f, w[0], w[1], 4000)).sum();
    total * phi(c[1], a[1])
}

/// `Σ_k e^{−ρ²k²/2}` and its Poisson dual, each summed over `|k| ≤ 200`.
pub fn theta_pair(rho: f64) -> (f64, f64) {
    let direct: f64 = (-200..=200).map(|k| (-rho * rho * (k * k) as f64 / 2.0).exp()).sum();
    let dual: f64 = (-200..=200).map(|k| (-2.0 * PI * PI * (k * k) as f64 / (rho * rho)).exp()).sum();
    (direct, (2.0 * PI).sqrt() / rho * dual)
}

/// Right-tail forms of the one-point law at level `x`.
pub fn tail_probability(x: f64) -> f64 {
    (-(4.0 / 3.0) * x.powf(1.5)).exp() / (16.0 * PI * x.powf(1.5))
}

pub fn tail_density(x: f64) -> f64 {
    (-(4.0 / 3.0) * x.powf(1.5)).exp() / (8.0 * PI * x)
}
