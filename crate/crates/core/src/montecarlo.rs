//! Direct simulation of the rate-1 chain, used to cross-check the exact laws.
//!
//! Samples are drawn in fixed chunks of [`CHUNK`]; chunk `k` uses
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, so results depend only
//! on the seed and the sample count, not on the thread count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::killed::TargetSet;
use crate::laws::HittingLaw;

pub const CHUNK: usize = 4096;
/// Censored fraction above which a run is flagged.
pub const CENSOR_FLAG: f64 = 1e-6;
/// Default horizon in units of `E_{alpha_M}[T_A]`.
pub const HORIZON_FACTOR: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Start {
    Vertex(usize),
    Stationary,
    /// Quasi-stationary law of a component of `B`; `None` is the designated `M`.
    QuasiStationary(Option<usize>),
}

impl Start {
    /// Start distribution over all states.
    pub fn distribution(&self, chain: &ReversibleChain, law: &HittingLaw) -> Result<Vec<f64>> {
        let n = chain.state_count();
        match *self {
            Start::Vertex(x) => {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
                let mut mu = vec![0.0; n];
                mu[x] = 1.0;
                Ok(mu)
            }
            Start::Stationary => Ok(chain.pi().to_vec()),
            Start::QuasiStationary(None) => Ok(law.killed().max_component().alpha.clone()),
            Start::QuasiStationary(Some(c)) => law
                .killed()
                .components()
                .iter()
                .find(|q| q.id == c)
                .map(|q| q.alpha.clone())
                .ok_or_else(|| Error::SimConfig(format!("no component {c}"))),
        }
    }

    /// Exact `P_mu[T_A > t]`.
    pub fn exact_tail(&self, chain: &ReversibleChain, law: &HittingLaw, t: f64) -> Result<f64> {
        Ok(match *self {
            Start::Vertex(x) => law.tail_from_vertex(x, t),
            Start::Stationary => law.tail_from_pi(t),
            _ => {
                let mu = self.distribution(chain, law)?;
                law.tails_from_vertices(t).iter().zip(&mu).map(|(s, m)| s * m).sum()
            }
        })
    }
}

impl FromStr for Start {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Spec {
            what: "start",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        match s.trim() {
            "pi" => Ok(Start::Stationary),
            "qs" => Ok(Start::QuasiStationary(None)),
            other => {
                if let Some(c) = other.strip_prefix("qs:") {
                    return c
                        .parse()
                        .map(|c| Start::QuasiStationary(Some(c)))
                        .map_err(|_| bad("expected qs:<component>"));
                }
                if let Some(v) = other.strip_prefix("vertex:") {
                    return v
                        .parse()
                        .map(Start::Vertex)
                        .map_err(|_| bad("expected vertex:<index>"));
                }
                Err(bad("expected vertex:<i>, pi, qs or qs:<component>"))
            }
        }
    }
}

impl fmt::Display for Start {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Start::Vertex(x) => write!(f, "vertex:{x}"),
            Start::Stationary => write!(f, "pi"),
            Start::QuasiStationary(None) => write!(f, "qs"),
            Start::QuasiStationary(Some(c)) => write!(f, "qs:{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub samples: usize,
    pub seed: u64,
    /// Paths still running at this time are censored.
    pub horizon: f64,
}

impl SimConfig {
    /// Horizon `10^4 E_{alpha_M}[T_A]`.
    pub fn for_law(law: &HittingLaw, samples: usize, seed: u64) -> Self {
        SimConfig {
            samples,
            seed,
            horizon: HORIZON_FACTOR * law.mean_from_alpha(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::SimConfig("samples must be positive".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::SimConfig(format!("horizon must be positive, got {}", self.horizon)));
        }
        Ok(())
    }
}

/// Cumulative row tables for inverse-CDF jumps.
struct Sampler {
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

impl Sampler {
    fn new(chain: &ReversibleChain) -> Self {
        let rows = (0..chain.state_count())
            .map(|x| {
                let row = chain.row(x);
                let targets = row.iter().map(|&(y, _)| y).collect();
                let cum = row
                    .iter()
                    .scan(0.0, |acc, &(_, p)| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect();
                (targets, cum)
            })
            .collect();
        Sampler { rows }
    }

    fn jump<R: Rng>(&self, x: usize, rng: &mut R) -> usize {
        let (targets, cum) = &self.rows[x];
        let u = rng.random::<f64>() * cum.last().copied().unwrap_or(1.0);
        let k = cum.partition_point(|&c| c <= u).min(targets.len() - 1);
        targets[k]
    }
}

fn cumulative(mu: &[f64]) -> Result<Vec<f64>> {
    if mu.iter().any(|&m| !(m >= 0.0)) {
        return Err(Error::SimConfig("start distribution has negative entries".into()));
    }
    let cum: Vec<f64> = mu
        .iter()
        .scan(0.0, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    if !(cum.last().copied().unwrap_or(0.0) > 0.0) {
        return Err(Error::SimConfig("start distribution has no mass".into()));
    }
    Ok(cum)
}

fn draw_start<R: Rng>(cum: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `body` on every chunk and concatenates the results in chunk order.
fn run_chunks<T, F>(samples: usize, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize) -> Vec<T> + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let size = |k: usize| CHUNK.min(samples - k * CHUNK);
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<T>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(|k| body(k, size(k))).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<T>> = (0..chunks).map(|k| body(k, size(k))).collect();
    parts.into_iter().flatten().collect()
}

/// Sampled hitting times; censored paths are stored as `horizon`.
#[derive(Debug, Clone, Serialize)]
pub struct HitSamples {
    pub times: Vec<f64>,
    pub censored: usize,
    pub horizon: f64,
    /// Set when the censored fraction exceeds [`CENSOR_FLAG`].
    pub flagged: bool,
}

impl HitSamples {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of samples with `T_A > t`.
    pub fn survivors(&self, t: f64) -> usize {
        self.times.iter().filter(|&&s| s > t).count()
    }

    pub fn empirical_tail(&self, t: f64) -> f64 {
        self.survivors(t) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.times.iter().sum::<f64>() / self.len() as f64
    }

    pub fn std_error(&self) -> f64 {
        let n = self.len() as f64;
        let m = self.mean();
        let var = self.times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Draws `cfg.samples` copies of `T_A` from the start distribution `mu`.
pub fn sample_hitting_times(
    chain: &ReversibleChain,
    ts: &TargetSet,
    mu: &[f64],
    cfg: &SimConfig,
) -> Result<HitSamples> {
    cfg.validate()?;
    let cum = cumulative(mu)?;
    let sampler = Sampler::new(chain);
    let horizon = cfg.horizon;
    let times = run_chunks(cfg.samples, |k, size| {
        let mut rng = chunk_rng(cfg.seed, k);
        (0..size)
            .map(|_| {
                let mut x = draw_start(&cum, &mut rng);
                let mut t = 0.0;
                while !ts.contains(x) {
                    let hold: f64 = rng.sample(Exp1);
                    t += hold;
                    if t >= horizon {
                        return horizon;
                    }
                    x = sampler.jump(x, &mut rng);
                }
                t
            })
            .collect()
    });
    let censored = times.iter().filter(|&&t| t >= horizon).count();
    let flagged = censored as f64 / times.len() as f64 > CENSOR_FLAG;
    if flagged {
        log::warn!("{censored} of {} paths censored at t = {horizon}", times.len());
    }
    Ok(HitSamples {
        times,
        censored,
        horizon,
        flagged,
    })
}

/// Local time at `origin` up to an independent `tau ~ Exp(rate)`, and
/// whether `origin` was reached by then.
#[derive(Debug, Clone, Serialize)]
pub struct LocalTimeSamples {
    pub local_time: Vec<f64>,
    pub hit: Vec<bool>,
}

impl LocalTimeSamples {
    pub fn mean_local_time(&self) -> f64 {
        self.local_time.iter().sum::<f64>() / self.local_time.len() as f64
    }

    pub fn hits(&self) -> usize {
        self.hit.iter().filter(|&&h| h).count()
    }
}

pub fn sample_killed_local_time(
    chain: &ReversibleChain,
    origin: usize,
    rate: f64,
    mu: &[f64],
    cfg: &SimConfig,
) -> Result<LocalTimeSamples> {
    cfg.validate()?;
    let n = chain.state_count();
    if origin >= n {
        return Err(Error::VertexOutOfRange { vertex: origin, n });
    }
    if !(rate > 0.0) {
        return Err(Error::SimConfig(format!("killing rate must be positive, got {rate}")));
    }
    let cum = cumulative(mu)?;
    let sampler = Sampler::new(chain);
    let pairs = run_chunks(cfg.samples, |k, size| {
        let mut rng = chunk_rng(cfg.seed, k);
        (0..size)
            .map(|_| {
                let tau = rng.sample::<f64, _>(Exp1) / rate;
                let mut x = draw_start(&cum, &mut rng);
                let mut t = 0.0;
                let mut local = 0.0;
                let mut hit = false;
                loop {
                    let hold: f64 = rng.sample(Exp1);
                    let stay = hold.min(tau - t);
                    if x == origin {
                        hit = true;
                        local += stay;
                    }
                    t += hold;
                    if t >= tau {
                        break;
                    }
                    x = sampler.jump(x, &mut rng);
                }
                (local, hit)
            })
            .collect()
    });
    let (local_time, hit) = pairs.into_iter().unzip();
    Ok(LocalTimeSamples { local_time, hit })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At p = 0 or 1 the near endpoint is exact; computing it loses an ulp.
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Kolmogorov-Smirnov distance between the samples and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
