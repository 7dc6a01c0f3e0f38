//! Exact finite-M simulation of the channel model: SINR samples, empirical
//! distribution, moments and BER.
//!
//! Sample `i` always draws from `ChaCha8(seed)` on stream `i`, so results do
//! not depend on how the work is split across threads.

mod channel;
mod gengamma;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use channel::{mmse_sinr, sample_channel, sample_delta_i, zf_sinr, ChannelSampler};
pub use gengamma::{fit_from_moments, fit_generalized_gamma, GenGammaFit};

use crate::distribution::Modulation;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub histogram_bins: usize,
    /// Work chunks processed in parallel. Does not affect results.
    pub streams: usize,
    /// Histogram range in dB; defaults to the sample range.
    pub histogram_range_db: Option<(f64, f64)>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 1_000_000,
            seed: 1,
            histogram_bins: 200,
            streams: 16,
            histogram_range_db: None,
        }
    }
}

/// RNG for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f` on samples `0..n` in parallel, returning results in index order.
pub fn map_samples<T, F>(n: usize, streams: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let streams = streams.clamp(1, n.max(1));
    let chunk = n.div_ceil(streams).max(1);
    let parts: Vec<Vec<T>> = (0..streams)
        .into_par_iter()
        .map(|c| {
            let lo = (c * chunk).min(n);
            let hi = ((c + 1) * chunk).min(n);
            (lo..hi)
                .map(|i| f(&mut sample_rng(seed, i as u64)))
                .collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Welford-style running mean, second and third central moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StreamingMoments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
}

impl StreamingMoments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    /// Population third central moment.
    pub fn third_central(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m3 / self.n as f64
        }
    }
}

impl FromIterator<f64> for StreamingMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = StreamingMoments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Histogram of `10 log10 γ`; masses sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges_db: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    fn build(sorted: &[f64], bins: usize, range: Option<(f64, f64)>) -> Self {
        let bins = bins.max(1);
        let db: Vec<f64> = sorted.iter().map(|g| 10.0 * g.log10()).collect();
        let (lo, hi) = range.unwrap_or_else(|| {
            let lo = db.first().copied().unwrap_or(-1.0);
            let hi = db.last().copied().unwrap_or(1.0);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        });
        let width = (hi - lo) / bins as f64;
        let edges_db = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        let mut inside = 0u64;
        for &x in &db {
            if x < lo || x > hi {
                continue;
            }
            let i = (((x - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
            inside += 1;
        }
        let total = inside.max(1) as f64;
        Histogram {
            edges_db,
            masses: counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    pub fn bin_centers_db(&self) -> Vec<f64> {
        self.edges_db.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Density of `10 log10 γ` per dB in each bin.
    pub fn density_db(&self) -> Vec<f64> {
        self.edges_db
            .windows(2)
            .zip(&self.masses)
            .map(|(w, m)| m / (w[1] - w[0]))
            .collect()
    }

    /// Density per unit linear γ at `gamma`, zero outside the histogram range.
    pub fn pdf_linear(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let x = 10.0 * gamma.log10();
        let (lo, hi) = (self.edges_db[0], *self.edges_db.last().unwrap());
        if x < lo || x > hi {
            return 0.0;
        }
        let bins = self.masses.len();
        let width = (hi - lo) / bins as f64;
        let i = (((x - lo) / width) as usize).min(bins - 1);
        self.masses[i] / width * 10.0 / (gamma * std::f64::consts::LN_10)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerEstimate {
    pub modulation: Modulation,
    pub ber: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub samples_requested: usize,
    pub samples_used: usize,
    pub mean: f64,
    pub variance: f64,
    pub third_central: f64,
    pub histogram: Histogram,
    pub ber: Vec<BerEstimate>,
    sorted: Vec<f64>,
}

impl McSummary {
    /// Builds a summary from raw SINR samples.
    pub fn from_samples(
        mut samples: Vec<f64>,
        requested: usize,
        cfg: &McConfig,
        modulations: &[Modulation],
    ) -> Self {
        let moments: StreamingMoments = samples.iter().copied().collect();
        let ber = modulations
            .iter()
            .map(|&modulation| {
                let m: StreamingMoments =
                    samples.iter().map(|&g| modulation.conditional_ber(g)).collect();
                BerEstimate {
                    modulation,
                    ber: m.mean(),
                    std_error: (m.variance() / m.count().max(1) as f64).sqrt(),
                }
            })
            .collect();
        samples.sort_by(f64::total_cmp);
        let histogram = Histogram::build(&samples, cfg.histogram_bins, cfg.histogram_range_db);
        McSummary {
            samples_requested: requested,
            samples_used: samples.len(),
            mean: moments.mean(),
            variance: moments.variance(),
            third_central: moments.third_central(),
            histogram,
            ber,
            sorted: samples,
        }
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn std_error_of_mean(&self) -> f64 {
        (self.variance / self.samples_used.max(1) as f64).sqrt()
    }

    /// `(E γ, E γ², E γ³)` from the sample moments.
    pub fn raw_moments(&self) -> (f64, f64, f64) {
        let n = self.samples_used as f64;
        let mu = self.mean;
        let var = if n > 0.0 { self.variance * (n - 1.0) / n } else { 0.0 };
        let m2 = var + mu * mu;
        let m3 = self.third_central + 3.0 * mu * var + mu * mu * mu;
        (mu, m2, m3)
    }

    /// Fraction of samples `<= gamma`.
    pub fn ecdf(&self, gamma: f64) -> f64 {
        let k = self.sorted.partition_point(|&x| x <= gamma);
        k as f64 / self.sorted.len().max(1) as f64
    }

    /// Empirical quantile (lower).
    pub fn quantile(&self, p: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        let n = self.sorted.len();
        let i = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[i]
    }

    /// Kolmogorov-Smirnov distance to a continuous CDF.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }

    /// KS distance to a CDF tabulated at increasing `gammas`, interpolated
    /// linearly in `ln γ` and held constant beyond the table.
    pub fn ks_distance_tabulated(&self, gammas: &[f64], cdf: &[f64]) -> f64 {
        let table = LogInterp::new(gammas, cdf);
        self.ks_distance(|g| table.eval(g))
    }
}

/// Piecewise-linear interpolation in `ln x`.
#[derive(Debug, Clone)]
pub struct LogInterp {
    ln_x: Vec<f64>,
    y: Vec<f64>,
}

impl LogInterp {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len(), "table columns differ in length");
        assert!(!x.is_empty(), "empty table");
        LogInterp {
            ln_x: x.iter().map(|v| v.ln()).collect(),
            y: y.to_vec(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let lx = x.ln();
        let n = self.ln_x.len();
        if lx <= self.ln_x[0] {
            return self.y[0];
        }
        if lx >= self.ln_x[n - 1] {
            return self.y[n - 1];
        }
        let j = self.ln_x.partition_point(|&v| v <= lx);
        let (x0, x1) = (self.ln_x[j - 1], self.ln_x[j]);
        let w = (lx - x0) / (x1 - x0);
        self.y[j - 1] + w * (self.y[j] - self.y[j - 1])
    }
}

/// Simulates the SINR of the scenario's receiver.
///
/// Draws that produce a rank-deficient interference matrix (a probability-zero
/// event) are dropped; `samples_used` reports the count kept.
pub fn run_mc(sc: &Scenario, cfg: &McConfig, modulations: &[Modulation]) -> Result<McSummary> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least one sample".into()));
    }
    let sampler = ChannelSampler::new(sc);
    let raw = map_samples(cfg.samples, cfg.streams, cfg.seed, |rng| {
        let (g0, h0) = sampler.sample(rng);
        sampler.sinr(&g0, &h0).ok()
    });
    let samples: Vec<f64> = raw.into_iter().flatten().collect();
    Ok(McSummary::from_samples(samples, cfg.samples, cfg, modulations))
}

/// Monte Carlo statistics of `ΔI(s, H0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaIStats {
    pub mean: f64,
    pub variance: f64,
    /// `ln` of the sample mean of `e^{-ΔI}`.
    pub ln_mgf: f64,
    pub samples: usize,
}

pub fn run_delta_i(sc: &Scenario, s: f64, samples: usize, seed: u64, streams: usize) -> Result<DeltaIStats> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let sampler = ChannelSampler::new(sc);
    let values = map_samples(samples, streams, seed, |rng| sample_delta_i(&sampler, s, rng))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let moments: StreamingMoments = values.iter().copied().collect();
    let shift = values.iter().map(|&d| -d).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|&d| (-d - shift).exp()).sum();
    Ok(DeltaIStats {
        mean: moments.mean(),
        variance: moments.variance(),
        ln_mgf: shift + (sum / values.len() as f64).ln(),
        samples: values.len(),
    })
}
