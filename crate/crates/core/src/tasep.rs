//! Continuous-time TASEP on a ring of `2a` sites with periodic step initial
//! data, and the relaxation-scale height observable.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::montecarlo::RandomStream;
use crate::{Error, Result};

/// Ring of sites `−a+1, …, a` with per-bond jump counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingState {
    pub a: usize,
    /// `occupation[j]` is site `j − a + 1`
    pub occupation: Vec<bool>,
    /// `jump_counts[j]` counts jumps across the bond from site `j − a + 1`
    pub jump_counts: Vec<u64>,
    pub time: f64,
}

/// Ring with particles on `−a+1..=0` and holes on `1..=a`.
pub fn init_step(a: usize) -> Result<RingState> {
    if a < 1 {
        return Err(Error::InvalidArgument("the half ring size must be at least 1".into()));
    }
    let occupation = (0..2 * a).map(|j| j < a).collect();
    Ok(RingState { a, occupation, jump_counts: vec![0; 2 * a], time: 0.0 })
}

impl RingState {
    pub fn len(&self) -> usize {
        2 * self.a
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn particles(&self) -> usize {
        self.occupation.iter().filter(|&&o| o).count()
    }

    /// Array index of site `n`, reduced modulo `2a`.
    pub fn index(&self, n: i64) -> usize {
        (n + self.a as i64 - 1).rem_euclid(self.len() as i64) as usize
    }

    /// `h(n, t) = h(n, 0) + 2·(jumps across the bond (n, n+1))`, with
    /// `h(n, 0) = |n|` on the fundamental domain.
    pub fn height(&self, n: i64) -> i64 {
        let j = self.index(n);
        let base = (j as i64 - self.a as i64 + 1).abs();
        base + 2 * self.jump_counts[j] as i64
    }

    /// Advances the dynamics to `horizon` with rate-1 exponential clocks on
    /// every particle. A clock that rings on a blocked particle is spent.
    pub fn evolve<R: Rng>(&mut self, horizon: f64, rng: &mut R) -> Result<()> {
        if !(horizon >= self.time) {
            return Err(Error::InvalidArgument(format!("horizon {horizon} precedes the current time {}", self.time)));
        }
        let n = self.len();
        let mut heap: BinaryHeap<Reverse<(Clock, usize)>> = self
            .occupation
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(j, _)| {
                let dt: f64 = Exp1.sample(rng);
                Reverse((Clock(self.time + dt), j))
            })
            .collect();
        while let Some(Reverse((Clock(t), j))) = heap.pop() {
            if t > horizon {
                break;
            }
            let target = (j + 1) % n;
            let at = if self.occupation[target] {
                j
            } else {
                self.occupation[j] = false;
                self.occupation[target] = true;
                self.jump_counts[j] += 1;
                target
            };
            let dt: f64 = Exp1.sample(rng);
            heap.push(Reverse((Clock(t + dt), at)));
        }
        self.time = horizon;
        Ok(())
    }
}

/// Ring time ordered by `f64::total_cmp`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Clock(f64);

impl Eq for Clock {}

impl PartialOrd for Clock {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Clock {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `h̃_T(γ, τ) = (h(γT^{2/3}, 2τT) − τT)/(−T^{1/3})` with `T = (2a)^{3/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledObservable {
    pub gamma: f64,
    pub tau: f64,
    pub t_big: f64,
}

impl ScaledObservable {
    pub fn new(gamma: f64, tau: f64, a: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("need finite γ and τ > 0, got ({gamma}, {tau})")));
        }
        Ok(Self { gamma, tau, t_big: relaxation_time(a) })
    }

    /// Lattice site `γT^{2/3}` rounded to the nearest integer.
    pub fn site(&self) -> i64 {
        (self.gamma * self.t_big.powf(2.0 / 3.0)).round() as i64
    }

    pub fn time(&self) -> f64 {
        2.0 * self.tau * self.t_big
    }

    pub fn value(&self, state: &RingState) -> f64 {
        (state.height(self.site()) as f64 - self.tau * self.t_big) / -self.t_big.cbrt()
    }
}

/// `T = (2a)^{3/2}`.
pub fn relaxation_time(a: usize) -> f64 {
    (2.0 * a as f64).powf(1.5)
}

/// One run from step data, observed at each `(γ_i, τ_i)`.
pub fn sample_scaled<R: Rng>(points: &[(f64, f64)], a: usize, rng: &mut R) -> Result<Vec<f64>> {
    let obs: Vec<ScaledObservable> =
        points.iter().map(|&(g, t)| ScaledObservable::new(g, t, a)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..obs.len()).collect();
    order.sort_by(|&i, &j| obs[i].tau.total_cmp(&obs[j].tau));
    let mut state = init_step(a)?;
    let mut out = vec![0.0; obs.len()];
    for i in order {
        state.evolve(obs[i].time(), rng)?;
        out[i] = obs[i].value(&state);
    }
    Ok(out)
}

/// `n_runs` independent runs; run `j` uses block `j` of `stream`.
pub fn scaled_samples(points: &[(f64, f64)], a: usize, n_runs: usize, stream: &RandomStream) -> Result<Vec<Vec<f64>>> {
    (0..n_runs)
        .into_par_iter()
        .map(|j| sample_scaled(points, a, &mut stream.block(j as u64)))
        .collect()
}

/// Fraction of runs with `h̃_T(γ_i, τ_i) ≤ β_i` for all `i`, and its
/// standard error. `points` holds `(γ_i, τ_i, β_i)`.
pub fn empirical_scaled_cdf(points: &[(f64, f64, f64)], a: usize, n_runs: usize, stream: &RandomStream) -> Result<(f64, f64)> {
    if a < 8 {
        return Err(Error::InvalidArgument(format!("the half ring size must be at least 8, got {a}")));
    }
    if n_runs < 1000 {
        return Err(Error::InvalidArgument(format!("at least 1000 runs are needed, got {n_runs}")));
    }
    let gt: Vec<(f64, f64)> = points.iter().map(|&(g, t, _)| (g, t)).collect();
    let runs = scaled_samples(&gt, a, n_runs, stream)?;
    let hits = runs.iter().filter(|r| r.iter().zip(points).all(|(v, p)| *v <= p.2)).count();
    let p = hits as f64 / n_runs as f64;
    Ok((p, (p * (1.0 - p) / n_runs as f64).sqrt()))
}

/// `sup_x |F_n(x) − F(x)|` for the empirical law of `samples`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
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
        let f = cdf(xs[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
