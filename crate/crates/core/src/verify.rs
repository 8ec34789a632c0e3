//! The acceptance suite as a library routine, shared by the `verify`
//! subcommand. Every check reports a measured error next to the bound it
//! must meet.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::distribution::{
    cdf_derivative, conditional_probability, joint_cdf, scaled_p_hat_m1, vanishing_check, ConditionalQuery,
    ContourSpec, EvaluationPoint, PeriodCase,
};
use crate::fredholm::{appendix_b_shell, shell_sum, KernelParams, SeriesKind, TruncationSpec};
use crate::limits::{
    critical_limit_integral, default_w_nodes, default_w_radii, finite_r_bridge_identity, limit_conditional_cdf,
    s_inf_probabilistic, s_inf_quadrature, SArgs,
};
use crate::montecarlo::{estimate_limit_probability, event_identity_check, RandomStream};
use crate::specfun::{c_of_rho, c_of_rho_dual, dist_to_origin, gaussian_density};
use crate::tasep::{relaxation_time, scaled_samples};
use crate::Result;

/// The eight acceptance criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Identities,
    Formulas,
    Tails,
    ScaledLimits,
    Conditional,
    Structure,
    Tasep,
    Reproducibility,
}

impl Criterion {
    pub const ALL: [Criterion; 8] = [
        Criterion::Identities,
        Criterion::Formulas,
        Criterion::Tails,
        Criterion::ScaledLimits,
        Criterion::Conditional,
        Criterion::Structure,
        Criterion::Tasep,
        Criterion::Reproducibility,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Identities => "identities",
            Criterion::Formulas => "formulas",
            Criterion::Tails => "tails",
            Criterion::ScaledLimits => "scaled-limits",
            Criterion::Conditional => "conditional",
            Criterion::Structure => "structure",
            Criterion::Tasep => "tasep",
            Criterion::Reproducibility => "reproducibility",
        }
    }

    /// Accepts the name or the number.
    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s || c.number().to_string() == s)
    }

    /// Suites that finish in seconds.
    pub fn is_fast(self) -> bool {
        matches!(self, Criterion::Identities | Criterion::Formulas | Criterion::Tails | Criterion::ScaledLimits)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One measured error against its bound. A check passes when
/// `measured ≤ required`; a computation error counts as a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub required: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, required: f64) -> Self {
        Self { name: name.into(), measured, required, passed: measured <= required, note: String::new() }
    }

    fn failed(name: impl Into<String>, required: f64, err: impl fmt::Display) -> Self {
        Self { name: name.into(), measured: f64::NAN, required, passed: false, note: err.to_string() }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub criterion: Criterion,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "criterion {} ({}): {state} in {:.1} s", self.criterion.number(), self.criterion, self.seconds)?;
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "  {mark} {:<58} measured {:>11.3e}  required ≤ {:.1e}", c.name, c.measured, c.required)?;
            if !c.note.is_empty() {
                write!(f, "  [{}]", c.note)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Runs one criterion. Stochastic parts draw from `seed`.
pub fn run(criterion: Criterion, seed: u64) -> Report {
    let start = Instant::now();
    let checks = match criterion {
        Criterion::Identities => identities(seed),
        Criterion::Formulas => formulas(),
        Criterion::Tails => tails(),
        Criterion::ScaledLimits => scaled_limits(),
        Criterion::Conditional => conditional(seed),
        Criterion::Structure => structure(),
        Criterion::Tasep => tasep_convergence(seed).0,
        Criterion::Reproducibility => reproducibility(seed),
    };
    Report { criterion, checks, seconds: start.elapsed().as_secs_f64() }
}

fn check(name: &str, required: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    match f() {
        Ok(v) => Check::at_most(name, v, required),
        Err(e) => Check::failed(name, required, e),
    }
}

fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / 2f64.sqrt())
}

/// `P(B(a1) ≥ y1 | B(a2) = y2) φ_{a2}(y2)`.
fn two_time_orthant(a: [f64; 2], y: [f64; 2]) -> f64 {
    let mu = a[0] / a[1] * y[1];
    let sd = (a[0] * (a[1] - a[0]) / a[1]).sqrt();
    upper_tail((y[0] - mu) / sd) * gaussian_density(y[1], a[1])
}

fn wrapped(x: f64, t: f64, r: f64) -> f64 {
    (-60..=60).map(|k| gaussian_density(x + k as f64 * r, t)).sum()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for j in 1..n {
        s += f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Circle motion through `b` times an independent line motion through `c`.
fn critical_two_point_reference(a: [f64; 2], b: [f64; 2], c: [f64; 2], r: f64) -> f64 {
    let da = a[1] - a[0];
    let mu = c[1] * a[0] / a[1];
    let sd = (a[0] * da / a[1]).sqrt();
    let f = |y: f64| wrapped(y, a[0], r) * wrapped(b[1] - y, da, r) * upper_tail((c[0] + dist_to_origin(y - b[0], r) - mu) / sd);
    let mut cuts = vec![0.0, r, b[0].rem_euclid(r), (b[0] + r / 2.0).rem_euclid(r)];
    cuts.sort_by(f64::total_cmp);
    let total: f64 = cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| simpson(f, w[0], w[1], 4000)).sum();
    total * gaussian_density(c[1], a[1])
}

fn identities(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let s2 = 2f64.sqrt();
    let cases: [(&[f64], &[f64]); 5] = [
        (&[1.0], &[0.3]),
        (&[0.5, 1.0], &[0.0, 0.0]),
        (&[0.3, 1.2], &[0.4, -0.5]),
        (&[0.3, 0.6, 1.0], &[0.1, -0.2, 0.3]),
        (&[0.2, 0.5, 0.9], &[-0.4, 0.3, 0.0]),
    ];
    for (a, b) in cases {
        out.push(check(&format!("S_inf line quadrature = bridge probability, a = {a:?}"), 1e-6, || {
            let args = SArgs::new(a.to_vec(), b.to_vec())?;
            let q = s_inf_quadrature(&args, None)?.value;
            let want = match a.len() {
                1 => gaussian_density(b[0] / s2, a[0]),
                2 => two_time_orthant([a[0], a[1]], [b[0] / s2, b[1] / s2]),
                _ => s_inf_probabilistic(&args)?,
            };
            Ok((q - want).abs())
        }));
    }
    let crit = |a: &[f64], b: &[f64], c: &[f64], r: f64| {
        critical_limit_integral(a, b, c, r, &default_w_radii(a.len(), r), default_w_nodes(a, r), None)
    };
    for (a, b, c, r) in [(1.0, 0.3, 0.2, 1.0), (0.7, 0.0, 0.0, 0.5), (0.7, 0.2, -0.3, 3.0)] {
        out.push(check(&format!("w-contour integral, one point, r = {r}"), 1e-8, || {
            let e = crit(&[a], &[b], &[c], r)?;
            Ok((e.value - gaussian_density(c, a) * wrapped(b, a, r)).abs())
        }));
    }
    for (a, b, c, r) in [
        ([0.5, 1.0], [0.0, 0.0], [0.0, 0.0], 1.0),
        ([0.4, 1.0], [0.3, 0.0], [0.2, 0.1], 1.0),
        ([0.3, 0.8], [-0.6, 0.4], [0.5, -0.2], 2.0),
    ] {
        out.push(check(&format!("w-contour integral, two points, r = {r}, b = {b:?}"), 1e-6, || {
            let e = crit(&a, &b, &c, r)?;
            Ok((e.value - critical_two_point_reference(a, b, c, r)).abs())
        }));
    }
    out.push(check("box identity, one point", 1e-6, || {
        let (l, rhs) = finite_r_bridge_identity(&SArgs::new(vec![0.8], vec![0.4])?, 1.0, None)?;
        let want = gaussian_density(0.4 / s2, 0.8);
        Ok((l.value - want).abs().max((rhs - want).abs()))
    }));
    for (a, b, r) in [([0.5, 1.0], [0.1, 0.2], 1.0), ([0.2, 0.9], [-0.3, 0.5], 0.4)] {
        out.push(check(&format!("box identity, two points, r = {r}"), 1e-6, || {
            let (l, rhs) = finite_r_bridge_identity(&SArgs::new(a.to_vec(), b.to_vec())?, r, None)?;
            let want = two_time_orthant(a, [b[0] / s2, b[1] / s2]) - two_time_orthant(a, [(b[0] + r) / s2, b[1] / s2]);
            Ok((l.value - want).abs().max((rhs - want).abs()))
        }));
    }
    for rho in [0.5, 1.0, 2.0, 5.0] {
        out.push(check(&format!("c(rho) theta forms agree, rho = {rho}"), 1e-12, || {
            Ok((c_of_rho(rho, 1e-16)? - c_of_rho_dual(rho, 1e-16)?).abs())
        }));
    }
    out.push(check("event identity violations in 1e6 samples", 0.0, || {
        Ok(event_identity_check(1_000_000, 1.0, &RandomStream::new(seed, 0))? as f64)
    }));
    out
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn formulas() -> Vec<Check> {
    let mut out = Vec::new();
    let polar = Complex64::from_polar;
    let one = || KernelParams::new(vec![0.3], vec![1.0], vec![0.5], 1.0, vec![polar(0.2, 0.4)]);
    let two = || {
        KernelParams::new(vec![0.2, -0.1], vec![0.5, 1.2], vec![0.3, 0.8], 1.3, vec![polar(0.1, 0.3), polar(0.25, -0.7)])
    };
    let mut cases: Vec<(bool, usize, Vec<usize>)> = Vec::new();
    for k in [1, 2, 3] {
        for n in 1..=2 {
            cases.push((false, k, vec![n]));
        }
        for n1 in 0..=2 {
            for n2 in 0..=2 {
                if n1 + n2 > 0 {
                    cases.push((true, k, vec![n1, n2]));
                }
            }
        }
    }
    for (m2, k, n) in cases {
        out.push(check(&format!("appendix form = Cauchy form, n = {n:?}, K = {k}"), 1e-9, || {
            let p = if m2 { two()? } else { one()? };
            let t = TruncationSpec::capped(k, 3);
            Ok(rel(appendix_b_shell(&p, &t, &n)?, shell_sum(&p, &t, &n, SeriesKind::D)?))
        }));
    }
    for n in [[0usize, 1], [1, 0]] {
        out.push(check(&format!("vanishing integrals, n = {n:?}, 64 nodes"), 1e-8, || {
            let c = ContourSpec::raw(vec![0.3, 0.6], 64)?;
            let pt = EvaluationPoint::new(vec![0.0, 0.3], vec![0.5, 1.0], vec![-0.5, 0.5], 1.0)?;
            Ok(vanishing_check(&pt, &c, &TruncationSpec::default(), &n)?.max())
        }));
    }
    out
}

fn tails() -> Vec<Check> {
    let c = || ContourSpec::raw(vec![0.5], 64);
    let tr = TruncationSpec::default();
    vec![
        check("1 - F(3), relative to the tail formula", 0.25, || {
            let b: f64 = 3.0;
            let e = joint_cdf(&EvaluationPoint::one(0.0, 1.0, b, 1.0)?, &c()?, &tr)?;
            let want = (-(4.0 / 3.0) * b.powf(1.5)).exp() / (16.0 * PI * b.powf(1.5));
            Ok(((1.0 - e.value) - want).abs() / want)
        }),
        check("density f(3), relative to the tail formula", 0.30, || {
            let l: f64 = 3.0;
            let e = cdf_derivative(&EvaluationPoint::one(0.0, 1.0, l, 1.0)?, &c()?, &tr)?;
            let want = (-(4.0 / 3.0) * l.powf(1.5)).exp() / (8.0 * PI * l);
            Ok((e.value - want).abs() / want)
        }),
    ]
}

fn scaled_limits() -> Vec<Check> {
    let tr = TruncationSpec::default();
    let scaled = |ell: f64, p: f64, case: PeriodCase| -> Result<f64> {
        let q = ConditionalQuery::new(vec![], vec![], vec![], ell, p)?;
        Ok(scaled_p_hat_m1(&q, &ContourSpec::family(ell, p, 1, 128)?, &tr, case)?.value)
    };
    let relative = |v: f64, want: f64| (v - want).abs() / want;
    vec![
        check("large period (l = 4, p = 2) vs S_inf^2", 0.10, || {
            Ok(relative(scaled(4.0, 2.0, PeriodCase::Large)?, 1.0 / (2.0 * PI)))
        }),
        check("small period (l = 6, p = 0.2) vs S_inf(2t, 2h)", 0.15, || {
            let want = s_inf_quadrature(&SArgs::new(vec![2.0], vec![0.0])?, None)?.value;
            Ok(relative(scaled(6.0, 0.2, PeriodCase::Small)?, want))
        })
        .with_note("finite-level budget"),
        check("critical period (l = 4, rho = 1) vs w-contour integral", 0.10, || {
            let ell: f64 = 4.0;
            let want = critical_limit_integral(&[1.0], &[0.0], &[0.0], 1.0, &default_w_radii(1, 1.0), default_w_nodes(&[1.0], 1.0), None)?.value;
            Ok(relative(scaled(ell, ell.powf(-0.25), PeriodCase::Critical)?, want))
        }),
    ]
}

fn conditional(seed: u64) -> Vec<Check> {
    let limit = || limit_conditional_cdf(PeriodCase::Large, &[0.0], &[0.5], &[0.0], None);
    let exact = check("conditional law at (l, p) = (4, 2) vs its limit", 0.05, || {
        let q = ConditionalQuery::new(vec![0.0], vec![0.5], vec![0.0], 4.0, 2.0)?;
        let r = conditional_probability(&q, &ContourSpec::family(4.0, 2.0, 2, 32)?, &TruncationSpec::default())?;
        Ok((r.value - limit()?).abs())
    });
    let mc = check("limit law, quadrature vs 1e5 paths (in SE)", 3.0, || {
        let e = estimate_limit_probability(PeriodCase::Large, &[0.0], &[0.5], &[0.0], None, 100_000, &RandomStream::new(seed, 1))?;
        Ok((e.value - limit()?).abs() / e.se)
    });
    vec![exact, mc]
}

fn structure() -> Vec<Check> {
    let tr = TruncationSpec::default();
    let mut out = Vec::new();
    out.push(check("monotonicity violations, one point", 0.0, || {
        let c = ContourSpec::raw(vec![0.5], 64)?;
        let mut last: Option<crate::distribution::Estimate> = None;
        let mut bad = 0;
        for b in [-4.0, -3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0] {
            let e = joint_cdf(&EvaluationPoint::one(0.2, 0.8, b, 1.0)?, &c, &tr)?;
            if let Some(l) = last {
                bad += (e.value < l.value - l.proxy() - e.proxy()) as u32;
            }
            last = Some(e);
        }
        Ok(bad as f64)
    }));
    out.push(check("monotonicity violations, two points", 0.0, || {
        let c = ContourSpec::raw(vec![0.3, 0.6], 32)?;
        let grid = [-2.0, -1.0, 0.0, 1.0];
        let mut vals = Vec::new();
        for &b1 in &grid {
            let mut row = Vec::new();
            for &b2 in &grid {
                let pt = EvaluationPoint::new(vec![0.0, 0.3], vec![0.5, 1.0], vec![b1, b2], 1.0)?;
                row.push(joint_cdf(&pt, &c, &tr)?);
            }
            vals.push(row);
        }
        let mut bad = 0;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let v = vals[i][j];
                for w in [vals.get(i + 1).map(|r| r[j]), vals[i].get(j + 1).copied()].into_iter().flatten() {
                    bad += (w.value < v.value - v.proxy() - w.proxy()) as u32;
                }
            }
        }
        Ok(bad as f64)
    }));
    out.push(check("marginal consistency, second level at +50", 1e-5, || {
        let pt = EvaluationPoint::new(vec![0.0, 0.3], vec![0.5, 1.0], vec![-1.0, 50.0], 1.0)?;
        let joint = joint_cdf(&pt, &ContourSpec::raw(vec![0.3, 0.6], 32)?, &tr)?;
        let one = joint_cdf(&EvaluationPoint::one(0.0, 0.5, -1.0, 1.0)?, &ContourSpec::raw(vec![0.5], 64)?, &tr)?;
        Ok((joint.value - one.value).abs())
    }));
    out.push(check("scaling identity across p in {0.5, 1, 2}", 1e-6, || {
        let (g, t, b) = (0.2, 1.0, -1.0);
        let c = ContourSpec::raw(vec![0.5], 64)?;
        let base = joint_cdf(&EvaluationPoint::one(g, t, b, 1.0)?, &c, &tr)?.value;
        let mut worst = 0.0f64;
        for p in [0.5f64, 2.0] {
            let v = joint_cdf(&EvaluationPoint::one(p * g, p.powf(1.5) * t, p.sqrt() * b, p)?, &c, &tr)?.value;
            worst = worst.max((v - base).abs());
        }
        Ok(worst)
    }));
    out
}

/// `sup |F_n − F|` when `F` at each sample is only known to lie in an
/// interval. The bound is conservative.
pub fn ks_distance_bounded<F: FnMut(f64) -> Result<(f64, f64)>>(samples: &[f64], mut cdf: F) -> Result<f64> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let (lo, hi) = cdf(xs[i])?;
        for f in [lo, hi] {
            d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        }
        i = j + 1;
    }
    Ok(d)
}

/// Lowest level at which the one-point CDF is still resolved on the circle
/// of radius 0.5; below it only `0 ≤ F ≤ F(LEFT_EDGE)` is used.
const LEFT_EDGE: f64 = -5.0;

/// Criterion 7 checks plus the raw TASEP samples behind them.
pub fn tasep_convergence(seed: u64) -> (Vec<Check>, Vec<f64>) {
    let a = 16;
    let runs = 10_000;
    let samples: Vec<f64> = match scaled_samples(&[(0.0, 1.0)], a, runs, &RandomStream::new(seed, 2)) {
        Ok(r) => r.into_iter().map(|r| r[0]).collect(),
        Err(e) => return (vec![Check::failed("TASEP samples", 0.0, e)], vec![]),
    };
    let tr = TruncationSpec::default();
    let ks = check("KS distance, a = 16, 1e4 runs, vs exact CDF", 0.08, || {
        let c = ContourSpec::raw(vec![0.5], 64)?;
        let f = |b: f64| -> Result<crate::distribution::Estimate> {
            joint_cdf(&EvaluationPoint::one(0.0, 1.0, b, 1.0)?, &c, &tr)
        };
        let edge = f(LEFT_EDGE)?;
        ks_distance_bounded(&samples, |x| {
            if x < LEFT_EDGE {
                return Ok((0.0, edge.value + edge.proxy()));
            }
            let e = f(x)?;
            Ok((e.value - e.proxy(), e.value + e.proxy()))
        })
    })
    .with_note("lattice step 2/T^(1/3)");
    let t_big = relaxation_time(a);
    let mean = samples.iter().map(|v| (t_big - v * t_big.cbrt()) / t_big).sum::<f64>() / samples.len() as f64;
    let rate = Check::at_most("height rate |mean h(0, 2T)/T - 1|", (mean - 1.0).abs(), 0.1);
    (vec![ks, rate], samples)
}

fn reproducibility(seed: u64) -> Vec<Check> {
    let mc = || estimate_limit_probability(PeriodCase::Critical, &[0.1], &[0.4], &[0.0], Some(1.0), 100_000, &RandomStream::new(seed, 3));
    let tasep = || scaled_samples(&[(0.0, 0.5), (0.25, 1.0)], 8, 2000, &RandomStream::new(seed, 4));
    let events = || event_identity_check(100_000, 0.7, &RandomStream::new(seed, 5));
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    vec![
        check("Monte Carlo record differs on rerun", 0.0, || {
            let (a, b) = (mc()?, mc()?);
            Ok((a.value.to_bits() != b.value.to_bits() || a.se.to_bits() != b.se.to_bits() || a != b) as u8 as f64)
        }),
        check("TASEP samples differ on rerun", 0.0, || {
            let (a, b) = (tasep()?, tasep()?);
            let differ = a.iter().zip(&b).filter(|(x, y)| bits(x) != bits(y)).count();
            Ok(differ as f64)
        }),
        check("event identity count differs on rerun", 0.0, || Ok((events()? != events()?) as u8 as f64)),
    ]
}
