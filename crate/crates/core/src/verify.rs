//! Brute-force oracles and the end-to-end verification suite.
//!
//! The oracles enumerate every tree of a magnitude and tally statistics with
//! uniform weights; they share no code with the kernel-recursion pipelines
//! they check. [`verify_all`] runs the full acceptance suite — exact
//! small-instance oracles, exact identity checks, asymptotic band checks,
//! and Monte Carlo fluctuation checks — and reports one pass/fail line per
//! criterion with pinned tolerances.

use crate::exact::{dist_ratio, expect, Dist, DistCache, MomentFn};
use crate::hypergeom::{derivative_identity_residual, pgf_s2};
use crate::moments::{asymptotic_check, AsymptoticCheck, MomentScan, MomentTable, ScanTarget};
use crate::montecarlo::{
    consecutive_ratio_variance, ratio_exceedance, run_experiment, CltExperiment, StatKind,
};
use crate::scalar::Scalar;
use crate::trees::{catalan, enumerate_trees, sample_uniform, strahler, bifurcation_ratio};
use crate::Rational;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::Instant;

// ── Enumeration oracles ────────────────────────────────────────────────

/// Law of the order-`r` branch count over all trees of magnitude `n`, by
/// exhaustive enumeration with uniform weights.
pub fn enumerated_count_law(r: u32, n: usize) -> Dist<Rational> {
    let trees = enumerate_trees(n).expect("magnitude within enumeration cap");
    let weight = Rational::ratio(1, trees.len() as i64);
    Dist::from_atoms(trees.iter().map(|t| {
        (Rational::from_usize(strahler(t).count(r) as usize), weight.clone())
    }))
}

/// Law of the ratio `S_{q+r}/S_q` (0 when `S_q = 0`) over all trees of
/// magnitude `n`, by exhaustive enumeration.
pub fn enumerated_ratio_law(q: u32, r: u32, n: usize) -> Dist<Rational> {
    let trees = enumerate_trees(n).expect("magnitude within enumeration cap");
    let weight = Rational::ratio(1, trees.len() as i64);
    Dist::from_atoms(trees.iter().map(|t| {
        (bifurcation_ratio(&strahler(t), q, r), weight.clone())
    }))
}

/// Chi-square statistic of sampled tree shapes against the uniform law on
/// the enumerated shapes of magnitude `n`.
pub fn sampler_gof_statistic(n: usize, samples: u64, seed: u64) -> f64 {
    let shapes = enumerate_trees(n).expect("magnitude within enumeration cap");
    let index: HashMap<String, usize> =
        shapes.iter().enumerate().map(|(i, t)| (t.to_parens(), i)).collect();
    let mut counts = vec![0u64; shapes.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        counts[index[&sample_uniform(n, &mut rng).to_parens()]] += 1;
    }
    let expected = samples as f64 / shapes.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

// ── Closed-form oracles (frozen constants) ─────────────────────────────

fn mean_closed(n: i64) -> Rational {
    Rational::ratio(n * (n - 1), 2 * (2 * n - 3))
}

fn variance_closed(n: i64) -> Rational {
    Rational::ratio(n * (n - 1) * (n - 2) * (n - 3), 2 * (2 * n - 3) * (2 * n - 3) * (2 * n - 5))
}

fn second_closed(n: i64) -> Rational {
    Rational::ratio(n * (n - 1), 4)
        * Rational::ratio(n * n - n - 4, (2 * n - 3) * (2 * n - 5))
}

fn third_closed(n: i64) -> Rational {
    Rational::ratio(n * (n - 1), 8)
        * Rational::ratio(
            n * n * n * n - 2 * n * n * n - 15 * n * n + 32 * n + 8,
            (2 * n - 3) * (2 * n - 5) * (2 * n - 7),
        )
}

// ── Acceptance suite ───────────────────────────────────────────────────

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    /// Criterion number (1-based, stable).
    pub id: u32,
    /// Short name.
    pub name: &'static str,
    /// Whether every check in the criterion held.
    pub passed: bool,
    /// Measured values, worst deviations, or the failure reason.
    pub detail: String,
}

impl CriterionReport {
    /// One-line rendering: `PASS  3  name — detail`.
    pub fn render(&self) -> String {
        format!(
            "{}  {:>2}  {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Suite configuration.
#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    /// Skip the Monte Carlo criteria (exact-only run).
    pub skip_mc: bool,
    /// Worker count for sampling criteria (part of the determinism key).
    pub workers: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { skip_mc: false, workers: 2 }
    }
}

/// Magnitude grid used by the asymptotic band checks.
pub const ACCEPTANCE_GRID: [usize; 5] = [256, 512, 1024, 2048, 4096];

/// A sampling criterion: takes the run configuration, returns pass/fail
/// plus a detail line.
type McCriterion = fn(&VerifyConfig) -> Result<(bool, String), String>;

const SEED_SECOND_ORDER: u64 = 20_240_817;
const SEED_HIGHER_ORDER: u64 = 20_240_818;
const SEED_CONCENTRATION: u64 = 20_240_819;
const SEED_DETERMINISM: u64 = 20_240_820;

/// Runs the full acceptance suite in order and returns one report per
/// criterion. With `skip_mc` the sampling criteria are reported as skipped
/// passes.
pub fn verify_all(config: &VerifyConfig) -> Vec<CriterionReport> {
    let mut reports = Vec::with_capacity(11);
    reports.push(run_criterion(1, "enumeration counts match the Catalan numbers", criterion1));
    reports.push(run_criterion(2, "second-order law matches enumeration", criterion2));
    reports.push(run_criterion(3, "higher-order and ratio laws match enumeration", criterion3));
    reports.push(run_criterion(4, "moment recursion matches laws and closed forms", criterion4));
    reports.push(run_criterion(5, "negative-moment recurrence residual is zero", criterion5));
    reports.push(run_criterion(6, "generating-function identities hold exactly", criterion6));
    reports.push(run_criterion(7, "asymptotic moment scans in band", criterion7));
    let mc: [(u32, &'static str, McCriterion); 4] = [
        (8, "second-order fluctuation law", criterion8),
        (9, "higher-order fluctuation laws", criterion9),
        (10, "consecutive-ratio concentration", criterion10),
        (11, "sampling runs are deterministic", criterion11),
    ];
    for (id, name, body) in mc {
        if config.skip_mc {
            reports.push(CriterionReport {
                id,
                name,
                passed: true,
                detail: "skipped (sampling disabled)".into(),
            });
        } else {
            reports.push(run_criterion_with(id, name, config, body));
        }
    }
    reports
}

fn run_criterion(
    id: u32,
    name: &'static str,
    body: fn() -> Result<(bool, String), String>,
) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    finish(id, name, passed, detail, start)
}

fn run_criterion_with(
    id: u32,
    name: &'static str,
    config: &VerifyConfig,
    body: fn(&VerifyConfig) -> Result<(bool, String), String>,
) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = body(config).unwrap_or_else(|e| (false, format!("error: {e}")));
    finish(id, name, passed, detail, start)
}

fn finish(id: u32, name: &'static str, passed: bool, detail: String, start: Instant) -> CriterionReport {
    let detail = format!("{} [{:.1}s]", detail, start.elapsed().as_secs_f64());
    CriterionReport { id, name, passed, detail }
}

/// Enumeration sizes for magnitudes 1..=12 equal the Catalan numbers;
/// budget 10 s.
fn criterion1() -> Result<(bool, String), String> {
    let start = Instant::now();
    for n in 1..=12usize {
        let got = enumerate_trees(n).map_err(|e| e.to_string())?.len();
        let want = catalan(n - 1);
        if BigInt::from(got) != want {
            return Ok((false, format!("magnitude {n}: {got} shapes, expected {want}")));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok((elapsed < 10.0, format!("12 magnitudes, up to 58786 shapes, in {elapsed:.2}s (limit 10s)")))
}

/// The kernel-built second-order law equals the enumerated law for
/// magnitudes 2..=10; budget 30 s.
fn criterion2() -> Result<(bool, String), String> {
    let start = Instant::now();
    let mut cache = DistCache::<Rational>::new();
    for n in 2..=10usize {
        let computed = cache.dist_s(2, n).map_err(|e| e.to_string())?;
        let oracle = enumerated_count_law(2, n);
        if computed != oracle {
            return Ok((false, format!("law mismatch at magnitude {n}")));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok((elapsed < 30.0, format!("9 magnitudes atom-exact in {elapsed:.2}s (limit 30s)")))
}

/// Third-order laws and all ratio laws with q + r ≤ 4 equal the enumerated
/// laws for magnitudes 2..=10.
fn criterion3() -> Result<(bool, String), String> {
    let mut cache = DistCache::<Rational>::new();
    for n in 2..=10usize {
        let computed = cache.dist_s(3, n).map_err(|e| e.to_string())?;
        if computed != enumerated_count_law(3, n) {
            return Ok((false, format!("order-3 law mismatch at magnitude {n}")));
        }
    }
    let pairs = [(1u32, 1u32), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)];
    for (q, r) in pairs {
        for n in 2..=10usize {
            let computed = dist_ratio(&mut cache, q, r, n).map_err(|e| e.to_string())?;
            if computed != enumerated_ratio_law(q, r, n) {
                return Ok((false, format!("ratio law (q={q}, r={r}) mismatch at magnitude {n}")));
            }
        }
    }
    Ok((true, "order-3 laws and 6 ratio families atom-exact over 9 magnitudes".into()))
}

/// The raw-moment recursion agrees with law-based moments (k ≤ 5, n ≤ 50)
/// and with the closed forms for the first three moments and the variance
/// (n ≤ 100), all exactly.
fn criterion4() -> Result<(bool, String), String> {
    let mut table = MomentTable::new();
    let mut cache = DistCache::<Rational>::new();
    for n in 2..=50usize {
        let d = cache.dist_s(2, n).map_err(|e| e.to_string())?;
        for k in 0..=5u32 {
            let direct = expect(&d, &MomentFn::Power(k as i32)).map_err(|e| e.to_string())?;
            if table.raw(k, n) != direct {
                return Ok((false, format!("recursion vs law mismatch at k={k}, n={n}")));
            }
        }
    }
    for n in 2..=100i64 {
        if table.raw(1, n as usize) != mean_closed(n) {
            return Ok((false, format!("mean closed form fails at n={n}")));
        }
        let var = table.raw(2, n as usize) - table.raw(1, n as usize).powi(2);
        if var != variance_closed(n) {
            return Ok((false, format!("variance closed form fails at n={n}")));
        }
    }
    for n in 4..=100i64 {
        if table.raw(2, n as usize) != second_closed(n) {
            return Ok((false, format!("second-moment closed form fails at n={n}")));
        }
        if table.raw(3, n as usize) != third_closed(n) {
            return Ok((false, format!("third-moment closed form fails at n={n}")));
        }
    }
    Ok((true, "recursion ≡ law moments (k ≤ 5, n ≤ 50); closed forms exact to n = 100".into()))
}

/// The exact recurrence tying negative moments at consecutive magnitudes
/// has residual exactly zero for k ≤ 4, n in 3..=100.
fn criterion5() -> Result<(bool, String), String> {
    let mut table = MomentTable::new();
    for k in 0..=4u32 {
        for n in 3..=100usize {
            let res = table.negative_recurrence_residual(k, n).map_err(|e| e.to_string())?;
            if !res.is_zero() {
                return Ok((false, format!("nonzero residual {res} at k={k}, n={n}")));
            }
        }
    }
    Ok((true, "490 residuals all exactly zero".into()))
}

/// The closed hypergeometric form of E[x^{S_2}] equals the defining sum
/// bit-exactly (n ≤ 30, x in {1/2, 1, 2, 5}), and the series derivative
/// identity has residual exactly zero (n in 3..=30).
fn criterion6() -> Result<(bool, String), String> {
    let xs =
        [Rational::ratio(1, 2), Rational::ratio(1, 1), Rational::ratio(2, 1), Rational::ratio(5, 1)];
    for n in 2..=30usize {
        for x in &xs {
            let e = pgf_s2::<Rational>(n, x).map_err(|e| e.to_string())?;
            if !e.residual().is_zero() {
                return Ok((false, format!("route mismatch at n={n}, x={x}")));
            }
        }
    }
    for n in 3..=30usize {
        for x in &xs {
            let res = derivative_identity_residual(n, x).map_err(|e| e.to_string())?;
            if !res.is_zero() {
                return Ok((false, format!("derivative residual {res} at n={n}, x={x}")));
            }
        }
    }
    Ok((true, "116 route equalities and 112 derivative residuals, all exact".into()))
}

/// Asymptotic scans: second-order families within [0.9, 1.1] at n = 4096
/// with monotone drift; higher-order count/ratio families within
/// [0.85, 1.15]; ambiguous odd constants reported under a [0.5, 2.0] rail;
/// float values spot-checked against the exact backend at n = 256.
/// Budget 5 min.
fn criterion7() -> Result<(bool, String), String> {
    let start = Instant::now();
    let grid = &ACCEPTANCE_GRID;
    let mut scan = MomentScan::<f64>::new();
    let mut failures: Vec<String> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    let mut worst: f64 = 0.0;
    let mut hard_targets: Vec<ScanTarget> = Vec::new();

    // Second-order families: tight band plus drift toward 1.
    let mut tight: Vec<ScanTarget> = Vec::new();
    tight.extend((0..=6).map(|k| ScanTarget::CountCentered { r: 1, k }));
    tight.extend((1..=4).map(|k| ScanTarget::NegativeS2 { k }));
    for l in 0..=3 {
        tight.extend((0..=4).map(|k| ScanTarget::MixedS2 { l, k }));
    }
    for target in tight {
        let check = asymptotic_check(&mut scan, target, grid).map_err(|e| e.to_string())?;
        worst = worst.max((check.final_ratio() - 1.0).abs());
        if !check.in_band(0.9, 1.1) {
            failures.push(format!("{target}: final ratio {:.4}", check.final_ratio()));
        }
        if !check.drifts_toward_one(3, 1e-3) {
            failures.push(format!("{target}: ratio drifts away from 1"));
        }
        hard_targets.push(target);
    }

    // Higher-order families: wider band, no drift requirement.
    let mut wide: Vec<ScanTarget> = Vec::new();
    for r in 1..=3 {
        wide.extend((0..=4).map(|k| ScanTarget::consecutive_ratio(r, k)));
    }
    for r in 2..=3 {
        wide.extend([2, 4].map(|k| ScanTarget::CountCentered { r, k }));
    }
    for q in 2..=3 {
        wide.extend([2, 4].map(|k| ScanTarget::RatioCentered { q, r: 2, k }));
    }
    for target in wide {
        let check = asymptotic_check(&mut scan, target, grid).map_err(|e| e.to_string())?;
        worst = worst.max((check.final_ratio() - 1.0).abs());
        if !check.in_band(0.85, 1.15) {
            failures.push(format!("{target}: final ratio {:.4}", check.final_ratio()));
        }
        hard_targets.push(target);
    }

    // Odd-power families with an ambiguous constant: sanity rail only,
    // fitted constant reported against both candidate readings.
    let mut railed: Vec<ScanTarget> = Vec::new();
    for r in 2..=3 {
        railed.extend([1, 3, 5].map(|k| ScanTarget::CountCentered { r, k }));
    }
    for q in 2..=3 {
        railed.extend([1, 3].map(|k| ScanTarget::RatioCentered { q, r: 2, k }));
    }
    for target in railed {
        let check = asymptotic_check(&mut scan, target, grid).map_err(|e| e.to_string())?;
        if !check.in_band(0.5, 2.0) {
            failures.push(format!("{target}: final ratio {:.4} outside sanity rail", check.final_ratio()));
        }
        note_constant(&check, &mut notes);
    }

    // Exact spot check at n = 256 for every hard-asserted target.
    let mut exact = MomentScan::<Rational>::new();
    for target in &hard_targets {
        let e = exact.measured(target, 256).map_err(|e| e.to_string())?.to_f64();
        let f = scan.measured(target, 256).map_err(|e| e.to_string())?;
        if (e - f).abs() > 1e-6 * e.abs().max(1e-30) {
            failures.push(format!("{target}: float {f} vs exact {e} at n=256"));
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 300.0 {
        failures.push(format!("runtime {elapsed:.0}s exceeds 300s"));
    }
    let detail = if failures.is_empty() {
        format!(
            "{} scans, worst |ratio-1| = {worst:.4}; exact spot checks at n=256 agree; {}",
            hard_targets.len() + 10,
            notes.join("; ")
        )
    } else {
        failures.join("; ")
    };
    Ok((failures.is_empty(), detail))
}

fn note_constant(check: &AsymptoticCheck, notes: &mut Vec<String>) {
    if let Some(rep) = &check.constant_report {
        notes.push(format!(
            "{}: fitted bracket {:.4} (statement {:.4}, shifted {:.4})",
            check.target, rep.fitted, rep.statement, rep.shifted
        ));
    }
}

/// Second-order fluctuation law at n = 4096, 10^5 samples: variance within
/// 3% of 1/16, KS distance below 0.02. Budget 2 min.
fn criterion8(config: &VerifyConfig) -> Result<(bool, String), String> {
    let start = Instant::now();
    let run = run_experiment(&CltExperiment {
        kind: StatKind::Count { r: 1 },
        magnitude: 4096,
        samples: 100_000,
        seed: SEED_SECOND_ORDER,
        workers: config.workers,
    })
    .map_err(|e| e.to_string())?;
    let s = run.summary;
    let target = 1.0 / 16.0;
    let var_ok = (s.variance - target).abs() <= 0.03 * target;
    let ks_ok = s.ks <= 0.02;
    let zero_ok = s.zero_ratio_frequency <= 1e-3;
    let elapsed = start.elapsed().as_secs_f64();
    let time_ok = elapsed < 120.0;
    Ok((
        var_ok && ks_ok && zero_ok && time_ok,
        format!(
            "variance {:.5} (target {target:.5} ±3%), ks {:.4} (limit 0.02), {:.0}s (limit 120s)",
            s.variance, s.ks, elapsed
        ),
    ))
}

/// Higher-order fluctuation laws at n = 2^14, 5·10^4 samples: the
/// consecutive ratio at order 2 within 10% of 1/4, the order-3 count within
/// 10% of 5/256, and the two closed forms for the (q=2, gap-1) variance
/// agree exactly.
fn criterion9(config: &VerifyConfig) -> Result<(bool, String), String> {
    let n = 1 << 14;
    let samples = 50_000;
    let ratio_run = run_experiment(&CltExperiment {
        kind: StatKind::Ratio { q: 2, r: 1 },
        magnitude: n,
        samples,
        seed: SEED_HIGHER_ORDER,
        workers: config.workers,
    })
    .map_err(|e| e.to_string())?;
    let count_run = run_experiment(&CltExperiment {
        kind: StatKind::Count { r: 2 },
        magnitude: n,
        samples,
        seed: SEED_HIGHER_ORDER,
        workers: config.workers,
    })
    .map_err(|e| e.to_string())?;
    let ratio_target = 0.25;
    let count_target = 5.0 / 256.0;
    let forms_agree =
        consecutive_ratio_variance(2) == StatKind::Ratio { q: 2, r: 1 }.predicted_variance();
    let ratio_ok = (ratio_run.summary.variance - ratio_target).abs() <= 0.1 * ratio_target;
    let count_ok = (count_run.summary.variance - count_target).abs() <= 0.1 * count_target;
    let zero_ok = ratio_run.summary.zero_ratio_frequency <= 1e-3
        && count_run.summary.zero_ratio_frequency <= 1e-3;
    Ok((
        forms_agree && ratio_ok && count_ok && zero_ok,
        format!(
            "ratio variance {:.4} (target 0.25 ±10%), count variance {:.5} (target {:.5} ±10%), closed forms equal: {}",
            ratio_run.summary.variance, count_run.summary.variance, count_target, forms_agree
        ),
    ))
}

/// Consecutive ratios concentrate at 1/4: the probability of straying more
/// than 0.05 is at most 0.02 at n = 2^14 for the first two orders.
fn criterion10(config: &VerifyConfig) -> Result<(bool, String), String> {
    let mut details = Vec::new();
    let mut ok = true;
    for r in [1u32, 2] {
        let check = ratio_exceedance(r, 1 << 14, 10_000, SEED_CONCENTRATION + r as u64, config.workers, 0.05)
            .map_err(|e| e.to_string())?;
        ok &= check.exceed_frequency <= 0.02;
        details.push(format!("order {r}: stray rate {:.4}", check.exceed_frequency));
    }
    Ok((ok, format!("{} (limit 0.02)", details.join(", "))))
}

/// Identical (seed, workers) reproduce a sampling run bit-for-bit.
fn criterion11(config: &VerifyConfig) -> Result<(bool, String), String> {
    let exp = CltExperiment {
        kind: StatKind::Ratio { q: 2, r: 1 },
        magnitude: 4096,
        samples: 20_000,
        seed: SEED_DETERMINISM,
        workers: config.workers,
    };
    let a = run_experiment(&exp).map_err(|e| e.to_string())?;
    let b = run_experiment(&exp).map_err(|e| e.to_string())?;
    let identical = a == b;
    Ok((identical, format!("two runs of {} samples bit-identical: {identical}", exp.samples)))
}

// ── Tests ──────────────────────────────────────────────────────────────
