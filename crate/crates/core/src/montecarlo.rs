//! Monte Carlo checks of the fluctuation laws: sampled branch-count and
//! ratio statistics against their predicted limiting normals, plus the
//! concentration of consecutive-order ratios at 1/4.
//!
//! Reproducibility contract: a run is fully determined by `(seed, workers,
//! experiment)`. The sample space `[0, N)` is split into contiguous blocks,
//! one per worker; each worker draws from its own counter-based RNG stream
//! derived from the shared seed, and partial results merge in worker order.
//! Identical inputs therefore give bit-identical output regardless of
//! thread scheduling.

use crate::trees::{sample_uniform, strahler};
use crate::Rational;
use crate::scalar::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors from Monte Carlo runs.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum McError {
    /// An experiment needs at least one sample.
    #[error("experiment needs at least one sample")]
    NoSamples,
    /// Trees need at least two leaves for any second-order statistic.
    #[error("magnitude must be at least 2, got {n}")]
    MagnitudeTooSmall {
        /// Requested magnitude.
        n: usize,
    },
    /// At least one worker is required.
    #[error("worker count must be positive")]
    NoWorkers,
    /// The statistic's limiting variance is zero; nothing to verify.
    #[error("statistic has zero predicted variance")]
    DegenerateStatistic,
    /// KS distance needs a nonempty sample set.
    #[error("empty sample set")]
    EmptySamples,
}

/// Which normalized statistic an experiment samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatKind {
    /// `√n (S_{r+1}/n − 4^{−r})`: a branch count against its asymptotic
    /// share of the magnitude. Requires `r ≥ 1`.
    Count {
        /// Order gap above the leaves.
        r: u32,
    },
    /// `√n (S_{q+r}/S_q − 4^{−r})`: a branch-count ratio across a gap of
    /// `r` orders. When `S_q = 0` the ratio is taken as 0 (and the hit is
    /// counted in `zero_ratio_frequency`).
    Ratio {
        /// Denominator order.
        q: u32,
        /// Order gap.
        r: u32,
    },
}

impl StatKind {
    /// Exact variance of the limiting normal:
    /// `(4^r − 1)/(3·16^r)` for counts, `(4^r − 1)/(3·4^{2r−q+1})` for
    /// ratios.
    pub fn predicted_variance(&self) -> Rational {
        let four = Rational::from_int(4);
        match *self {
            StatKind::Count { r } => {
                (four.powi(r as i32) - Rational::ratio(1, 1))
                    / Rational::from_int(3)
                    * four.powi(-2 * r as i32)
            }
            StatKind::Ratio { q, r } => {
                (four.powi(r as i32) - Rational::ratio(1, 1)) / Rational::from_int(3)
                    * four.powi(q as i32 - 2 * r as i32 - 1)
            }
        }
    }

    /// Asymptotic center `4^{−r}` of the unnormalized statistic.
    pub fn center(&self) -> Rational {
        let r = match *self {
            StatKind::Count { r } | StatKind::Ratio { r, .. } => r,
        };
        Rational::from_int(4).powi(-(r as i32))
    }
}

/// Limiting variance `4^{r−3}` of the consecutive-order ratio
/// `S_{r+1}/S_r`; must coincide with
/// `StatKind::Ratio { q: r, r: 1 }.predicted_variance()`.
pub fn consecutive_ratio_variance(r: u32) -> Rational {
    Rational::from_int(4).powi(r as i32 - 3)
}

/// A reproducible sampling experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CltExperiment {
    /// Statistic to sample.
    pub kind: StatKind,
    /// Tree magnitude (number of leaves).
    pub magnitude: usize,
    /// Number of trees to draw.
    pub samples: u64,
    /// RNG seed shared by all workers (each worker uses its own stream).
    pub seed: u64,
    /// Worker count; part of the reproducibility key.
    pub workers: usize,
}

// ── Streaming moments ──────────────────────────────────────────────────

/// One-pass accumulator for mean and second-to-fourth central moments,
/// with an order-stable pairwise merge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    /// Empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one observation in (Pébay's single-pass update).
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    /// Absorbs another accumulator (associative up to rounding; callers keep
    /// a fixed merge order for bit-stable results).
    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta * delta * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + delta * delta * delta * delta * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta * delta * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        self.mean += delta * nb / n;
        self.n += other.n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
    }

    /// Number of observations.
    pub fn count(&self) -> u64 {
        self.n
    }

    /// Sample mean (0 when empty).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 below two observations).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    /// Third central moment `Σ(x−x̄)³/n` (0 when empty).
    pub fn central3(&self) -> f64 {
        if self.n == 0 { 0.0 } else { self.m3 / self.n as f64 }
    }

    /// Fourth central moment `Σ(x−x̄)⁴/n` (0 when empty).
    pub fn central4(&self) -> f64 {
        if self.n == 0 { 0.0 } else { self.m4 / self.n as f64 }
    }
}

// ── Experiments ────────────────────────────────────────────────────────

/// Summary statistics of one experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSummary {
    /// Samples drawn.
    pub count: u64,
    /// Sample mean of the normalized statistic.
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Third central moment.
    pub m3: f64,
    /// Fourth central moment.
    pub m4: f64,
    /// KS distance of the sample against `Normal(0, predicted_variance)`.
    pub ks: f64,
    /// Fraction of samples where the ratio denominator count was zero.
    pub zero_ratio_frequency: f64,
}

/// Full result: the summary plus every sample in draw order (worker blocks
/// concatenated by worker id), for histogram export and re-analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct McRun {
    /// Experiment that produced this run.
    pub experiment: CltExperiment,
    /// Predicted limiting variance, as `f64`.
    pub predicted_variance: f64,
    /// Summary statistics.
    pub summary: McSummary,
    /// Normalized statistic per sample.
    pub samples: Vec<f64>,
}

fn evaluate(kind: StatKind, sqrt_n: f64, center: f64, counts: &dyn Fn(u32) -> u64) -> (f64, bool) {
    match kind {
        // S_1 = n, so the count statistic is the q = 1 ratio statistic;
        // sharing the expression keeps the two bit-identical per sample.
        StatKind::Count { r } => {
            let ratio = counts(r + 1) as f64 / counts(1) as f64;
            (sqrt_n * (ratio - center), false)
        }
        StatKind::Ratio { q, r } => {
            let denom = counts(q);
            if denom == 0 {
                (sqrt_n * (0.0 - center), true)
            } else {
                let ratio = counts(q + r) as f64 / denom as f64;
                (sqrt_n * (ratio - center), false)
            }
        }
    }
}

fn worker_run(
    kind: StatKind,
    magnitude: usize,
    quota: u64,
    seed: u64,
    stream: u64,
) -> (MomentAccumulator, Vec<f64>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let sqrt_n = (magnitude as f64).sqrt();
    let center = kind.center().to_f64();
    let mut acc = MomentAccumulator::new();
    let mut samples = Vec::with_capacity(quota as usize);
    let mut zero_hits = 0u64;
    for _ in 0..quota {
        let tree = sample_uniform(magnitude, &mut rng);
        let profile = strahler(&tree);
        let (stat, zero_hit) = evaluate(kind, sqrt_n, center, &|r| profile.count(r));
        acc.push(stat);
        samples.push(stat);
        zero_hits += u64::from(zero_hit);
    }
    (acc, samples, zero_hits)
}

/// Runs an experiment to completion and summarizes it.
///
/// Deterministic for fixed `(seed, workers, experiment)`; see the module
/// docs for the parallelism contract.
pub fn run_experiment(exp: &CltExperiment) -> Result<McRun, McError> {
    if exp.samples == 0 {
        return Err(McError::NoSamples);
    }
    if exp.magnitude < 2 {
        return Err(McError::MagnitudeTooSmall { n: exp.magnitude });
    }
    if exp.workers == 0 {
        return Err(McError::NoWorkers);
    }
    let predicted = exp.kind.predicted_variance();
    if predicted.to_f64() <= 0.0 {
        return Err(McError::DegenerateStatistic);
    }
    let workers = exp.workers;
    let base = exp.samples / workers as u64;
    let extra = exp.samples % workers as u64;
    let results: Vec<(MomentAccumulator, Vec<f64>, u64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let quota = base + u64::from((w as u64) < extra);
                let kind = exp.kind;
                let magnitude = exp.magnitude;
                let seed = exp.seed;
                scope.spawn(move || worker_run(kind, magnitude, quota, seed, w as u64))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut acc = MomentAccumulator::new();
    let mut samples = Vec::with_capacity(exp.samples as usize);
    let mut zero_hits = 0u64;
    for (worker_acc, worker_samples, worker_zeros) in results {
        acc.merge(&worker_acc);
        samples.extend_from_slice(&worker_samples);
        zero_hits += worker_zeros;
    }
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("statistics are finite"));
    let ks = ks_distance_normal(&sorted, 0.0, predicted.to_f64())?;
    let summary = McSummary {
        count: acc.count(),
        mean: acc.mean(),
        variance: acc.variance(),
        m3: acc.central3(),
        m4: acc.central4(),
        ks,
        zero_ratio_frequency: zero_hits as f64 / exp.samples as f64,
    };
    Ok(McRun { experiment: *exp, predicted_variance: predicted.to_f64(), summary, samples })
}

// ── Concentration of consecutive ratios ────────────────────────────────

/// Empirical tail of `|S_{r+1}/S_r − 1/4|` at one magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExceedanceCheck {
    /// Denominator order.
    pub r: u32,
    /// Tree magnitude.
    pub magnitude: usize,
    /// Samples drawn.
    pub samples: u64,
    /// Deviation threshold.
    pub threshold: f64,
    /// Fraction of samples with `|S_{r+1}/S_r − 1/4| > threshold`.
    pub exceed_frequency: f64,
    /// Fraction of samples with `S_r = 0`.
    pub zero_frequency: f64,
}

/// Measures how often the consecutive-order ratio strays more than
/// `threshold` from 1/4 (samples with `S_r = 0` count as strays).
pub fn ratio_exceedance(
    r: u32,
    magnitude: usize,
    samples: u64,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<ExceedanceCheck, McError> {
    let exp = CltExperiment {
        kind: StatKind::Ratio { q: r, r: 1 },
        magnitude,
        samples,
        seed,
        workers,
    };
    let run = run_experiment(&exp)?;
    // The stored statistic is √n(ratio − 1/4), so the ratio deviation
    // threshold scales by √n.
    let cut = threshold * (magnitude as f64).sqrt();
    let exceed = run.samples.iter().filter(|s| s.abs() > cut).count();
    Ok(ExceedanceCheck {
        r,
        magnitude,
        samples,
        threshold,
        exceed_frequency: exceed as f64 / samples as f64,
        zero_frequency: run.summary.zero_ratio_frequency,
    })
}

// ── Normal distance ────────────────────────────────────────────────────

/// Standard normal CDF via the error function (absolute error well below
/// `1e-12`).
fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

/// Sup distance between the empirical CDF of `sorted` (ascending) and
/// `Normal(mean, variance)`.
pub fn ks_distance_normal(sorted: &[f64], mean: f64, variance: f64) -> Result<f64, McError> {
    if sorted.is_empty() {
        return Err(McError::EmptySamples);
    }
    let n = sorted.len() as f64;
    let sd = variance.sqrt();
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = normal_cdf((x - mean) / sd);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

// ── Tests ──────────────────────────────────────────────────────────────
