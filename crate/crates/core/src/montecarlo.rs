//! Brownian-bridge samplers on the line and on the circle `I_ρ`, Monte Carlo
//! estimators of the pinched-up limit probabilities, and the per-sample
//! event identity behind the critical-regime limit.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::PeriodCase;
use crate::specfun::{dist_to_origin, CirclePoint};
use crate::{Error, Result};

/// Paths simulated per independently keyed block.
const BLOCK: usize = 4096;

/// A reproducible random stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.block(0)
    }

    /// Generator for block `j < 2^28` of this stream. Blocks start `2^40`
    /// words apart (the word position wraps at `2^68`).
    pub fn block(&self, j: u64) -> ChaCha8Rng {
        debug_assert!(j < 1 << 28);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos((j as u128) << 40);
        rng
    }
}

/// Sampled values of a bridge at increasing times in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePath {
    pub times: Vec<f64>,
    /// lifted real values; for a circle bridge these are representatives
    pub values: Vec<f64>,
    /// circle length for a bridge on `I_ρ`
    pub period: Option<f64>,
    /// winding class of the endpoint (circle bridges)
    pub winding: i64,
}

impl BridgePath {
    pub fn circle_points(&self) -> Result<Vec<CirclePoint>> {
        let rho = self
            .period
            .ok_or_else(|| Error::InvalidArgument("a line bridge has no circle projection".into()))?;
        self.values.iter().map(|v| CirclePoint::new(*v, rho)).collect()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t > 0.0 && *t < 1.0)) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!("times must be strictly increasing in (0, 1), got {times:?}")));
    }
    Ok(())
}

/// Bridge from 0 at time 0 to `end` at time 1, by sequential conditioning.
fn bridge_values<R: rand::Rng>(times: &[f64], end: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let (mut s, mut x) = (0.0, 0.0);
    for &t in times {
        let mean = x + (end - x) * (t - s) / (1.0 - s);
        let var = (t - s) * (1.0 - t) / (1.0 - s);
        let z: f64 = StandardNormal.sample(rng);
        x = mean + var.sqrt() * z;
        s = t;
        out.push(x);
    }
    out
}

/// Standard Brownian bridge at the given times.
pub fn sample_bridge(times: &[f64], stream: &RandomStream) -> Result<BridgePath> {
    check_times(times)?;
    let values = bridge_values(times, 0.0, &mut stream.rng());
    Ok(BridgePath { times: times.to_vec(), values, period: None, winding: 0 })
}

/// Law of the endpoint winding class: `P(k) ∝ φ_1(kρ)`.
#[derive(Debug, Clone)]
pub struct WindingLaw {
    pub rho: f64,
    offset: i64,
    index: WeightedIndex<f64>,
}

impl WindingLaw {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("circle length must be positive, got {rho}")));
        }
        // e^{−k²ρ²/2} < 1e-20 beyond this
        let kmax = ((92.0f64).sqrt() / rho).ceil() as i64;
        let weights: Vec<f64> = (-kmax..=kmax).map(|k| (-(k as f64 * rho).powi(2) / 2.0).exp()).collect();
        let index = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self { rho, offset: kmax, index })
    }

    pub fn probability(&self, k: i64) -> f64 {
        let norm: f64 = (-self.offset..=self.offset).map(|j| (-(j as f64 * self.rho).powi(2) / 2.0).exp()).sum();
        (-(k as f64 * self.rho).powi(2) / 2.0).exp() / norm
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> i64 {
        self.index.sample(rng) as i64 - self.offset
    }
}

fn circle_values<R: rand::Rng>(times: &[f64], law: &WindingLaw, rng: &mut R) -> (Vec<f64>, i64) {
    let k = law.sample(rng);
    (bridge_values(times, k as f64 * law.rho, rng), k)
}

/// Brownian bridge on `I_ρ` pinned to `{0}_ρ`: a winding class `k` drawn with
/// weight `φ_1(kρ)`, then a line bridge from 0 to `kρ`.
pub fn sample_circle_bridge(times: &[f64], rho: f64, stream: &RandomStream) -> Result<BridgePath> {
    check_times(times)?;
    let law = WindingLaw::new(rho)?;
    let (values, winding) = circle_values(times, &law, &mut stream.rng());
    Ok(BridgePath { times: times.to_vec(), values, period: Some(rho), winding })
}

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub stream_id: u64,
}

/// Hits of `∩_i {field(t_i, x_i) ≥ h_i}` over `n` paths of one block.
fn block_hits(case: PeriodCase, x: &[f64], t: &[f64], h: &[f64], law: Option<&WindingLaw>, rng: &mut ChaCha8Rng, n: usize) -> u64 {
    let mut hits = 0u64;
    for _ in 0..n {
        let ok = match case {
            PeriodCase::Small => bridge_values(t, 0.0, rng).iter().zip(h).all(|(b, h)| b >= h),
            PeriodCase::Large => {
                let b1 = bridge_values(t, 0.0, rng);
                let b2 = bridge_values(t, 0.0, rng);
                (0..t.len()).all(|i| b2[i] - (b1[i] - x[i]).abs() >= h[i])
            }
            PeriodCase::Critical => {
                let law = law.expect("critical case carries a winding law");
                let (b1, _) = circle_values(t, law, rng);
                let b2 = bridge_values(t, 0.0, rng);
                (0..t.len()).all(|i| b2[i] - dist_to_origin(b1[i] - x[i], law.rho) >= h[i])
            }
        };
        hits += ok as u64;
    }
    hits
}

/// Monte Carlo estimate of the limit probability of `case`. `rho` is the
/// circle length for the critical regime.
pub fn estimate_limit_probability(
    case: PeriodCase,
    x: &[f64],
    t: &[f64],
    h: &[f64],
    rho: Option<f64>,
    n_paths: usize,
    stream: &RandomStream,
) -> Result<McEstimate> {
    if n_paths < 100 {
        return Err(Error::InvalidArgument(format!("at least 100 paths are needed, got {n_paths}")));
    }
    if x.len() != t.len() || h.len() != t.len() {
        return Err(Error::SizeMismatch("x, t, h must have equal lengths".into()));
    }
    check_times(t)?;
    let law = match case {
        PeriodCase::Critical => Some(WindingLaw::new(
            rho.ok_or_else(|| Error::InvalidArgument("the critical regime needs the circle length".into()))?,
        )?),
        _ => None,
    };
    let blocks = n_paths.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|j| {
            let n = BLOCK.min(n_paths - j * BLOCK);
            block_hits(case, x, t, h, law.as_ref(), &mut stream.block(j as u64), n)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let value = hits as f64 / n_paths as f64;
    Ok(McEstimate {
        value,
        se: (value * (1.0 - value) / n_paths as f64).sqrt(),
        n_paths,
        seed: stream.seed,
        stream_id: stream.stream_id,
    })
}

/// Both sides of the event identity
/// `∪_k {X − Y ≥ −ρk, X + Y ∈ [ρk, ρ(k+1))} = {X ≥ dist_ρ({Y}, {0})}`.
pub fn event_sides(x: f64, y: f64, rho: f64) -> (bool, bool) {
    let s = x + y;
    // the windows [ρk, ρ(k+1)) tile the line, so only one k can contribute
    let mut k = (s / rho).floor();
    if s < rho * k {
        k -= 1.0;
    } else if s >= rho * (k + 1.0) {
        k += 1.0;
    }
    (x - y >= -rho * k, x >= dist_to_origin(y, rho))
}

/// Number of standard-normal pairs `(X, Y)` on which the two sides of
/// [`event_sides`] disagree.
pub fn event_identity_check(n_samples: usize, rho: f64, stream: &RandomStream) -> Result<u64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("circle length must be positive, got {rho}")));
    }
    let blocks = n_samples.div_ceil(BLOCK);
    Ok((0..blocks)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream.block(j as u64);
            let n = BLOCK.min(n_samples - j * BLOCK);
            (0..n)
                .filter(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    let (l, r) = event_sides(x, y, rho);
                    l != r
                })
                .count() as u64
        })
        .sum())
}
