//! Exact moment tables for the second-order branch count, and convergence
//! scans that compare finite-`n` moments of counts and ratios against their
//! asymptotic laws.
//!
//! Two layers live here:
//!
//! * [`MomentTable`]: exact rational moments of `S_2` (raw, centered at
//!   `n/4`, negative, and mixed), with the raw moments produced by a
//!   two-term recursion in `n` and everything else reduced to raw moments or
//!   to the exact law of `S_2`.
//! * [`MomentScan`] / [`asymptotic_check`]: moments of higher-order counts
//!   `S_{r+1}` and ratios `S_{q+r}/S_q` for large `n`, computed by iterating
//!   the transition kernel, divided by the predicted leading-order form. The
//!   scan is generic over the backend: `f64` for big grids, rationals for
//!   exact spot checks.

use crate::exact::{DistCache, ExactError, MomentFn, expect};
use crate::scalar::Scalar;
use crate::Rational;
use num_traits::Zero;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Errors from moment computations and scans.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MomentError {
    /// Propagated magnitude errors.
    #[error(transparent)]
    Exact(#[from] ExactError),
    /// A scan needs at least one grid point.
    #[error("empty magnitude grid")]
    EmptyGrid,
    /// The predicted asymptotic form vanishes; no ratio can be formed.
    #[error("asymptotic prediction is identically zero")]
    DegeneratePrediction,
}

/// Product of every other integer down from `k`; `(-1)!! = 1`.
fn double_factorial(k: i64) -> i64 {
    let mut acc = 1;
    let mut j = k;
    while j > 1 {
        acc *= j;
        j -= 2;
    }
    acc
}

/// Binomial coefficient in machine integers (small `k` only).
fn binomial(k: u32, j: u32) -> i64 {
    let mut acc: i64 = 1;
    for i in 0..j.min(k - j) {
        acc = acc * (k - i) as i64 / (i + 1) as i64;
    }
    acc
}

// ── Exact moments of the second-order count ────────────────────────────

/// Memoized exact moments of `S_2`.
///
/// Raw moments follow the recursion
/// `⟨S_2^{k+1}⟩_n = (n/2)⟨S_2^k⟩_n − (n(n−2)/(2(2n−3)))⟨S_2^k⟩_{n−1}`
/// seeded with `⟨S_2^0⟩ = 1` and the magnitude-1 boundary `⟨S_2^k⟩_1 = 0`
/// for `k ≥ 1` (a single leaf has no second order). Central moments are
/// taken about `n/4`, the asymptotic center, not about the mean.
pub struct MomentTable {
    raw: HashMap<(u32, usize), Rational>,
    cache: DistCache<Rational>,
}

impl Default for MomentTable {
    fn default() -> Self {
        Self::new()
    }
}

impl MomentTable {
    /// Empty table.
    pub fn new() -> Self {
        MomentTable { raw: HashMap::new(), cache: DistCache::new() }
    }

    /// Raw moment `⟨S_2^k⟩` at magnitude `n ≥ 1`.
    pub fn raw(&mut self, k: u32, n: usize) -> Rational {
        assert!(n >= 1, "magnitudes are positive");
        if k == 0 {
            return Rational::ratio(1, 1);
        }
        if n == 1 {
            return Rational::ratio(0, 1);
        }
        if let Some(v) = self.raw.get(&(k, n)) {
            return v.clone();
        }
        for kk in 1..=k {
            for m in 2..=n {
                if self.raw.contains_key(&(kk, m)) {
                    continue;
                }
                let at_m = if kk == 1 { Rational::ratio(1, 1) } else { self.raw[&(kk - 1, m)].clone() };
                let below = if m == 2 {
                    // Magnitude-1 boundary: 1 for the zeroth moment, else 0.
                    if kk == 1 { Rational::ratio(1, 1) } else { Rational::ratio(0, 1) }
                } else if kk == 1 {
                    Rational::ratio(1, 1)
                } else {
                    self.raw[&(kk - 1, m - 1)].clone()
                };
                let mi = m as i64;
                let v = Rational::ratio(mi, 2) * at_m
                    - Rational::ratio(mi * (mi - 2), 2 * (2 * mi - 3)) * below;
                self.raw.insert((kk, m), v);
            }
        }
        self.raw[&(k, n)].clone()
    }

    /// Central moment `⟨(S_2 − n/4)^k⟩` at magnitude `n ≥ 1`, by binomial
    /// expansion over raw moments.
    pub fn central(&mut self, k: u32, n: usize) -> Rational {
        let center = Rational::ratio(-(n as i64), 4);
        Rational::sum((0..=k).map(|j| {
            Rational::from_int(binomial(k, j)) * center.powi((k - j) as i32) * self.raw(j, n)
        }))
    }

    /// Negative moment `⟨S_2^{−k}⟩` at magnitude `n ≥ 2`, from the exact law
    /// of `S_2` (whose support excludes 0 for `n ≥ 2`).
    pub fn negative(&mut self, k: u32, n: usize) -> Result<Rational, MomentError> {
        if n < 2 {
            return Err(ExactError::MagnitudeTooSmall { n, min: 2 }.into());
        }
        let d = self.cache.dist_s(2, n)?;
        Ok(expect(&d, &MomentFn::Power(-(k as i32)))?)
    }

    /// Mixed moment `⟨S_2^l (S_2 − n/4)^k⟩` at magnitude `n ≥ 2`, from the
    /// exact law of `S_2`.
    pub fn mixed(&mut self, l: u32, k: u32, n: usize) -> Result<Rational, MomentError> {
        if n < 2 {
            return Err(ExactError::MagnitudeTooSmall { n, min: 2 }.into());
        }
        let center = Rational::ratio(n as i64, 4);
        let MomentFn::Polynomial(centered) = MomentFn::centered_power(&center, k) else {
            unreachable!("centered_power returns a polynomial")
        };
        // Multiply by x^l: shift the coefficients up by l.
        let mut coeffs = vec![Rational::zero(); l as usize];
        coeffs.extend(centered);
        let d = self.cache.dist_s(2, n)?;
        Ok(expect(&d, &MomentFn::Polynomial(coeffs))?)
    }

    /// Residual of the exact pre-asymptotic identity tying negative moments
    /// at consecutive magnitudes (`n ≥ 3`):
    ///
    /// `⟨S_2^{−(k+1)}⟩_n = ⟨S_2^{−k}⟩_n − ((n−2)/2)⟨S_2^{−(k+1)}⟩_n
    ///     + (n(n−2)/(2(2n−3)))⟨S_2^{−(k+1)}⟩_{n−1}`.
    ///
    /// Returns left minus right; a correct build yields exactly zero.
    pub fn negative_recurrence_residual(&mut self, k: u32, n: usize) -> Result<Rational, MomentError> {
        if n < 3 {
            return Err(ExactError::MagnitudeTooSmall { n, min: 3 }.into());
        }
        let ni = n as i64;
        let lhs = self.negative(k + 1, n)?;
        let rhs = self.negative(k, n)?
            - Rational::ratio(ni - 2, 2) * self.negative(k + 1, n)?
            + Rational::ratio(ni * (ni - 2), 2 * (2 * ni - 3)) * self.negative(k + 1, n - 1)?;
        Ok(lhs - rhs)
    }
}

// ── Asymptotic scan targets and predicted forms ────────────────────────

/// A finite-`n` moment family with a predicted leading-order asymptote.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScanTarget {
    /// `⟨(S_{r+1} − n/4^r)^k⟩`: central moments of a branch count, centered
    /// at the asymptotic value. Grows like `n^{⌊k/2⌋}`.
    CountCentered {
        /// Center exponent: the count of order `r + 1` is centered at `n/4^r`.
        r: u32,
        /// Moment power.
        k: u32,
    },
    /// `⟨S_2^{−k}⟩`: negative moments of the second-order count, predicted
    /// `(n/4)^{−k}`.
    NegativeS2 {
        /// Moment power (of the reciprocal).
        k: u32,
    },
    /// `⟨S_2^l (S_2 − n/4)^k⟩`: raw-times-central mixed moments.
    MixedS2 {
        /// Raw power.
        l: u32,
        /// Centered power.
        k: u32,
    },
    /// `⟨(S_{q+r}/S_q − 4^{−r})^k⟩`: central moments of a branch-count
    /// ratio across a gap of `r` orders, starting at order `q`. Decays like
    /// `n^{−⌊k/2⌋}` for even `k` and one power faster for odd `k`.
    RatioCentered {
        /// Base order of the ratio denominator.
        q: u32,
        /// Order gap of the ratio numerator.
        r: u32,
        /// Moment power.
        k: u32,
    },
}

impl ScanTarget {
    /// The ratio of counts at consecutive orders `r + 1` over `r` (gap 1).
    pub fn consecutive_ratio(r: u32, k: u32) -> Self {
        ScanTarget::RatioCentered { q: r, r: 1, k }
    }
}

impl fmt::Display for ScanTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanTarget::CountCentered { r, k } => {
                write!(f, "E[(S_{} - n/4^{r})^{k}]", r + 1)
            }
            ScanTarget::NegativeS2 { k } => write!(f, "E[S_2^-{k}]"),
            ScanTarget::MixedS2 { l, k } => write!(f, "E[S_2^{l} (S_2 - n/4)^{k}]"),
            ScanTarget::RatioCentered { q, r, k } => {
                write!(f, "E[(S_{}/S_{q} - 4^-{r})^{k}]", q + r)
            }
        }
    }
}

/// Predicted leading-order form `coefficient · n^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct Asymptote {
    /// Exact leading coefficient.
    pub coefficient: Rational,
    /// Power of `n`.
    pub power: i32,
    /// For odd-power count/ratio families with gap ≥ 2, the bracket factor
    /// inside the coefficient has two published candidate readings; the
    /// coefficient above uses `statement`.
    pub brackets: Option<BracketCandidates>,
}

impl Asymptote {
    /// Evaluates the prediction at one magnitude.
    pub fn eval(&self, n: usize) -> f64 {
        self.coefficient.to_f64() * (n as f64).powi(self.power)
    }
}

/// The two candidate readings of the odd-power bracket factor.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketCandidates {
    /// `(1/5)·((4^{r+1}−1)/3 + ((4^{r−1}−1)/3)·4(2s+1))`.
    pub statement: Rational,
    /// Same with both inner exponents shifted down:
    /// `(1/5)·((4^r−1)/3 + ((4^{r−2}−1)/3)·4(2s+1))`.
    pub shifted: Rational,
}

/// Bracket factor under the first reading; equals 1 at `r = 1`.
fn bracket_statement(r: u32, s: u32) -> Rational {
    let four = Rational::from_int(4);
    let third = |e: i32| (four.powi(e) - Rational::ratio(1, 1)) / Rational::from_int(3);
    Rational::ratio(1, 5)
        * (third(r as i32 + 1) + third(r as i32 - 1) * Rational::from_int(4 * (2 * s as i64 + 1)))
}

/// Bracket factor under the second reading.
fn bracket_shifted(r: u32, s: u32) -> Rational {
    let four = Rational::from_int(4);
    let third = |e: i32| (four.powi(e) - Rational::ratio(1, 1)) / Rational::from_int(3);
    Rational::ratio(1, 5)
        * (third(r as i32) + third(r as i32 - 2) * Rational::from_int(4 * (2 * s as i64 + 1)))
}

impl ScanTarget {
    /// The predicted leading-order asymptote for this family.
    ///
    /// Count families use `(4^r − 1)/3` variance-accumulation factors; ratio
    /// families gain a factor `4^{q−1}` per even power (and per odd power
    /// plus one) from the base order. The odd ratio forms decay one power of
    /// `n` faster than the even ones, which is where a published statement
    /// disagrees with the identities the even forms force; see
    /// [`BracketCandidates`] and the fitted report in [`AsymptoticCheck`].
    pub fn asymptote(&self) -> Asymptote {
        let four = Rational::from_int(4);
        let accum = |r: u32| (four.powi(r as i32) - Rational::ratio(1, 1)) / Rational::from_int(3);
        match *self {
            ScanTarget::CountCentered { r, k } => {
                let s = (k / 2) as i32;
                if k % 2 == 0 {
                    Asymptote {
                        coefficient: Rational::from_int(double_factorial(k as i64 - 1))
                            * accum(r).powi(s)
                            * four.powi(-2 * s * r as i32),
                        power: s,
                        brackets: None,
                    }
                } else {
                    let bracket = bracket_statement(r, k / 2);
                    Asymptote {
                        coefficient: Rational::from_int(double_factorial(k as i64))
                            / Rational::from_int(2)
                            * four.powi(-(k as i32) * r as i32)
                            * accum(r).powi(s)
                            * bracket.clone(),
                        power: s,
                        brackets: (r >= 2).then(|| BracketCandidates {
                            statement: bracket,
                            shifted: bracket_shifted(r, k / 2),
                        }),
                    }
                }
            }
            ScanTarget::NegativeS2 { k } => Asymptote {
                coefficient: four.powi(k as i32),
                power: -(k as i32),
                brackets: None,
            },
            ScanTarget::MixedS2 { l, k } => {
                let s = (k / 2) as i32;
                let count_part = if k % 2 == 0 {
                    Rational::from_int(double_factorial(k as i64 - 1)) * four.powi(-2 * s)
                } else {
                    Rational::from_int(double_factorial(k as i64) * (2 * l as i64 + 1))
                        / Rational::from_int(2)
                        * four.powi(-(k as i32))
                };
                Asymptote {
                    coefficient: four.powi(-(l as i32)) * count_part,
                    power: l as i32 + s,
                    brackets: None,
                }
            }
            ScanTarget::RatioCentered { q, r, k } => {
                let s = (k / 2) as i32;
                if k % 2 == 0 {
                    Asymptote {
                        coefficient: four.powi(s * (q as i32 - 1))
                            * Rational::from_int(double_factorial(k as i64 - 1))
                            * accum(r).powi(s)
                            * four.powi(-2 * s * r as i32),
                        power: -s,
                        brackets: None,
                    }
                } else {
                    let bracket = bracket_statement(r, k / 2);
                    Asymptote {
                        coefficient: four.powi((s + 1) * (q as i32 - 1))
                            * Rational::from_int(double_factorial(k as i64))
                            / Rational::from_int(2)
                            * four.powi(-(k as i32) * r as i32)
                            * accum(r).powi(s)
                            * bracket.clone(),
                        power: -s - 1,
                        brackets: (r >= 2).then(|| BracketCandidates {
                            statement: bracket,
                            shifted: bracket_shifted(r, k / 2),
                        }),
                    }
                }
            }
        }
    }
}

// ── Scan engine ────────────────────────────────────────────────────────

/// Kernel-iteration engine computing [`ScanTarget`] moments at large `n`.
///
/// Count moments at order `r + 1 ≥ 3` go through raw-moment tables
/// `E[S_L^j]` lifted level by level through the kernel; ratio moments lift
/// the centered level-1 law the same way, with the magnitude-1 boundary
/// contributing `(−4^{−r})^k` (the ratio convention assigns 0 when the
/// denominator count is 0). Second-order quantities use direct kernel sums,
/// which in the `f64` backend avoids the cancellation of a binomial
/// expansion.
pub struct MomentScan<T: Scalar> {
    cache: DistCache<T>,
    // (level, j, m) → E[S_level^j] at magnitude m; level ≥ 2, m ≥ 2.
    count_raw: HashMap<(u32, u32, usize), T>,
    // (gap, k, level, m) → ⟨(S_{level+gap}/S_level − 4^{−gap})^k⟩; m ≥ 2.
    ratio: HashMap<(u32, u32, u32, usize), T>,
}

impl<T: Scalar> Default for MomentScan<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> MomentScan<T> {
    /// Empty engine.
    pub fn new() -> Self {
        MomentScan { cache: DistCache::new(), count_raw: HashMap::new(), ratio: HashMap::new() }
    }

    /// The target's moment at magnitude `n ≥ 2`, in the engine's backend.
    pub fn measured(&mut self, target: &ScanTarget, n: usize) -> Result<T, MomentError> {
        match *target {
            ScanTarget::CountCentered { r: 1, k } => {
                let kernel = self.cache.kernel(n)?;
                let center = T::ratio(n as i64, 4);
                Ok(kernel.mix(|m| (T::from_usize(m) - center.clone()).powi(k as i32)))
            }
            ScanTarget::CountCentered { r, k } => {
                self.ensure_count(r + 1, k, n, false)?;
                Ok(self.centered_count(r, k, n))
            }
            ScanTarget::NegativeS2 { k } => {
                let kernel = self.cache.kernel(n)?;
                Ok(kernel.mix(|m| T::from_usize(m).powi(-(k as i32))))
            }
            ScanTarget::MixedS2 { l, k } => {
                let kernel = self.cache.kernel(n)?;
                let center = T::ratio(n as i64, 4);
                Ok(kernel.mix(|m| {
                    T::from_usize(m).powi(l as i32)
                        * (T::from_usize(m) - center.clone()).powi(k as i32)
                }))
            }
            ScanTarget::RatioCentered { q, r, k } => {
                if n < 2 {
                    return Err(ExactError::MagnitudeTooSmall { n, min: 2 }.into());
                }
                self.ensure_ratio(r, k, q, n)?;
                Ok(self.ratio_get(r, k, q, n))
            }
        }
    }

    /// `⟨(S_{r+1} − n/4^r)^k⟩` by binomial expansion over filled raw tables.
    fn centered_count(&self, r: u32, k: u32, n: usize) -> T {
        assert!(r <= 15, "center 4^r must fit in i64");
        let center = T::ratio(-(n as i64), 4i64.pow(r));
        T::sum((0..=k).map(|j| {
            T::from_int(binomial(k, j))
                * center.powi((k - j) as i32)
                * self.count_get(r + 1, j, n)
        }))
    }

    /// Raw count moment lookup; level 1 and magnitude 1 are closed-form.
    fn count_get(&self, level: u32, j: u32, m: usize) -> T {
        if level == 1 {
            return T::from_usize(m).powi(j as i32);
        }
        if m == 1 {
            return if j == 0 { T::one() } else { T::zero() };
        }
        self.count_raw[&(level, j, m)].clone()
    }

    /// Fills raw count tables bottom-up: level `level` at magnitude `n` (or
    /// at every magnitude `2..=n` when `all_mags`), powers `0..=jmax`.
    fn ensure_count(&mut self, level: u32, jmax: u32, n: usize, all_mags: bool) -> Result<(), MomentError> {
        for lev in 2..=level {
            let mags: Vec<usize> = if lev < level {
                (2..=(n >> (level - lev))).collect()
            } else if all_mags {
                (2..=n).collect()
            } else {
                vec![n]
            };
            for m in mags {
                if self.count_raw.contains_key(&(lev, jmax, m)) {
                    continue;
                }
                let kernel = self.cache.kernel(m)?;
                for j in 0..=jmax {
                    if self.count_raw.contains_key(&(lev, j, m)) {
                        continue;
                    }
                    let v = kernel.mix(|mm| self.count_get(lev - 1, j, mm));
                    self.count_raw.insert((lev, j, m), v);
                }
            }
        }
        Ok(())
    }

    /// Centered ratio moment lookup; magnitude 1 is the convention constant.
    fn ratio_get(&self, gap: u32, k: u32, level: u32, m: usize) -> T {
        if m == 1 {
            return T::ratio(-1, 4i64.pow(gap)).powi(k as i32);
        }
        self.ratio[&(gap, k, level, m)].clone()
    }

    /// Level-1 centered ratio moment `⟨(S_{1+gap}/m − 4^{−gap})^k⟩` at
    /// magnitude `m ≥ 2`; count tables must already cover order `1 + gap`
    /// when `gap ≥ 2`.
    fn ratio_base(&mut self, gap: u32, k: u32, m: usize) -> Result<T, MomentError> {
        if gap == 1 {
            let kernel = self.cache.kernel(m)?;
            let inv = T::one() / T::from_usize(m);
            let quarter = T::ratio(1, 4);
            return Ok(kernel.mix(|mm| {
                (T::from_usize(mm) * inv.clone() - quarter.clone()).powi(k as i32)
            }));
        }
        let center = T::ratio(-(m as i64), 4i64.pow(gap));
        let sum = T::sum((0..=k).map(|j| {
            T::from_int(binomial(k, j)) * center.powi((k - j) as i32) * self.count_get(1 + gap, j, m)
        }));
        Ok(sum * T::from_usize(m).powi(-(k as i32)))
    }

    /// Fills ratio tables bottom-up through level `q` at magnitude `n`.
    fn ensure_ratio(&mut self, gap: u32, k: u32, q: u32, n: usize) -> Result<(), MomentError> {
        for lev in 1..=q {
            let mags: Vec<usize> =
                if lev < q { (2..=(n >> (q - lev))).collect() } else { vec![n] };
            let Some(&max) = mags.last() else { continue };
            if lev == 1 && gap >= 2 {
                self.ensure_count(1 + gap, k, max, lev < q)?;
            }
            for m in mags {
                if self.ratio.contains_key(&(gap, k, lev, m)) {
                    continue;
                }
                let v = if lev == 1 {
                    self.ratio_base(gap, k, m)?
                } else {
                    let kernel = self.cache.kernel(m)?;
                    kernel.mix(|mm| self.ratio_get(gap, k, lev - 1, mm))
                };
                self.ratio.insert((gap, k, lev, m), v);
            }
        }
        Ok(())
    }
}

// ── Scan driver ────────────────────────────────────────────────────────

/// One grid point of a convergence scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    /// Magnitude.
    pub n: usize,
    /// Finite-`n` moment (converted to `f64` for reporting).
    pub measured: f64,
    /// Predicted leading-order value.
    pub predicted: f64,
    /// `measured / predicted`; approaches 1 when the asymptote is right.
    pub ratio: f64,
}

/// Fitted value of the ambiguous odd-power bracket, next to both published
/// candidate readings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantReport {
    /// Bracket implied by the largest grid point (measured / rest-of-form).
    pub fitted: f64,
    /// First candidate (the one the predictions here use).
    pub statement: f64,
    /// Second candidate (inner exponents shifted down by one).
    pub shifted: f64,
}

/// Result of scanning one target over a magnitude grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticCheck {
    /// The scanned family.
    pub target: ScanTarget,
    /// One row per grid magnitude, ascending.
    pub rows: Vec<ScanRow>,
    /// Present for odd-power families whose constant has two readings.
    pub constant_report: Option<ConstantReport>,
}

impl AsymptoticCheck {
    /// Ratio at the largest grid point.
    pub fn final_ratio(&self) -> f64 {
        self.rows.last().expect("grid is nonempty").ratio
    }

    /// True when the last ratio lies inside `[lo, hi]`.
    pub fn in_band(&self, lo: f64, hi: f64) -> bool {
        let r = self.final_ratio();
        r.is_finite() && r >= lo && r <= hi
    }

    /// True when `|ratio − 1|` is non-increasing over the last `window` grid
    /// points, allowing each step to backslide by at most `slack`.
    pub fn drifts_toward_one(&self, window: usize, slack: f64) -> bool {
        let start = self.rows.len().saturating_sub(window);
        self.rows[start..]
            .windows(2)
            .all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs() + slack)
    }
}

/// Scans `target` over an ascending magnitude grid, dividing the measured
/// moment by the predicted asymptote at each point.
pub fn asymptotic_check<T: Scalar>(
    scan: &mut MomentScan<T>,
    target: ScanTarget,
    grid: &[usize],
) -> Result<AsymptoticCheck, MomentError> {
    if grid.is_empty() {
        return Err(MomentError::EmptyGrid);
    }
    let asymptote = target.asymptote();
    if asymptote.coefficient.is_zero() {
        return Err(MomentError::DegeneratePrediction);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &n in grid {
        let measured = scan.measured(&target, n)?.to_f64();
        let predicted = asymptote.eval(n);
        rows.push(ScanRow { n, measured, predicted, ratio: measured / predicted });
    }
    let constant_report = asymptote.brackets.as_ref().map(|b| {
        let statement = b.statement.to_f64();
        ConstantReport {
            fitted: rows.last().expect("nonempty").ratio * statement,
            statement,
            shifted: b.shifted.to_f64(),
        }
    });
    Ok(AsymptoticCheck { target, rows, constant_report })
}

// ── Tests ──────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::dist_ratio;
    use crate::hypergeom::pgf_s2;
    use crate::verify::enumerated_count_law;
    use num_traits::One;

    fn rat(num: i64, den: i64) -> Rational {
        Rational::ratio(num, den)
    }

    // Closed forms used as oracles below (transcribed once, tested exactly).
    fn mean_closed(n: i64) -> Rational {
        rat(n * (n - 1), 2 * (2 * n - 3))
    }
    fn second_closed(n: i64) -> Rational {
        rat(n * (n - 1), 4) * rat(n * n - n - 4, (2 * n - 3) * (2 * n - 5))
    }
    fn third_closed(n: i64) -> Rational {
        rat(n * (n - 1), 8)
            * rat(
                n * n * n * n - 2 * n * n * n - 15 * n * n + 32 * n + 8,
                (2 * n - 3) * (2 * n - 5) * (2 * n - 7),
            )
    }
    fn variance_closed(n: i64) -> Rational {
        rat(n * (n - 1) * (n - 2) * (n - 3), 2 * (2 * n - 3) * (2 * n - 3) * (2 * n - 5))
    }

    #[test]
    fn raw_moment_fixtures() {
        let mut t = MomentTable::new();
        assert_eq!(t.raw(1, 4), rat(6, 5));
        assert_eq!(t.raw(3, 4), rat(12, 5));
        assert_eq!(t.raw(0, 17), Rational::one());
        assert_eq!(t.raw(2, 1), Rational::ratio(0, 1));
    }

    #[test]
    fn raw_moments_match_closed_forms() {
        let mut t = MomentTable::new();
        for n in 2..=200 {
            assert_eq!(t.raw(1, n as usize), mean_closed(n), "mean n={n}");
        }
        for n in 4..=100 {
            assert_eq!(t.raw(2, n as usize), second_closed(n), "second n={n}");
            assert_eq!(t.raw(3, n as usize), third_closed(n), "third n={n}");
        }
    }

    #[test]
    fn variance_matches_closed_form() {
        let mut t = MomentTable::new();
        for n in 2..=100 {
            let var = t.raw(2, n as usize) - t.raw(1, n as usize).powi(2);
            assert_eq!(var, variance_closed(n), "n={n}");
        }
    }

    #[test]
    fn raw_moments_match_law_expectations() {
        let mut t = MomentTable::new();
        let mut cache = DistCache::<Rational>::new();
        for n in 2..=25 {
            let d = cache.dist_s(2, n).unwrap();
            for k in 0..=5 {
                let direct = expect(&d, &MomentFn::Power(k as i32)).unwrap();
                assert_eq!(t.raw(k, n), direct, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn central_moment_fixtures() {
        let mut t = MomentTable::new();
        // Centered at n/4 (the asymptotic center), not at the mean: at n = 4
        // the first central moment is 6/5 - 1 and the second is the variance
        // 4/25 plus the squared offset 1/25.
        assert_eq!(t.central(1, 4), rat(1, 5));
        assert_eq!(t.central(2, 4), rat(1, 5));
        assert_eq!(t.central(0, 9), Rational::one());
        for n in 2..=100 {
            assert_eq!(t.central(1, n as usize), rat(n, 4 * (2 * n - 3)), "first n={n}");
            assert_eq!(
                t.central(2, n as usize),
                rat(n, 16) * rat(4 * n * n - 17 * n + 16, (2 * n - 3) * (2 * n - 5)),
                "second n={n}"
            );
        }
    }

    #[test]
    fn central_matches_law_expectations() {
        let mut t = MomentTable::new();
        let mut cache = DistCache::<Rational>::new();
        for n in 2..=30usize {
            let d = cache.dist_s(2, n).unwrap();
            let center = rat(n as i64, 4);
            for k in 0..=4 {
                let direct = expect(&d, &MomentFn::centered_power(&center, k)).unwrap();
                assert_eq!(t.central(k, n), direct, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn negative_moment_fixtures() {
        let mut t = MomentTable::new();
        assert_eq!(t.negative(1, 4).unwrap(), rat(9, 10));
        assert_eq!(t.negative(0, 30).unwrap(), Rational::one());
        assert_eq!(t.negative(1, 2).unwrap(), Rational::one());
        assert!(t.negative(1, 1).is_err());
    }

    #[test]
    fn negative_recurrence_residual_is_zero() {
        let mut t = MomentTable::new();
        for k in 0..=2 {
            for n in 3..=40 {
                assert_eq!(t.negative_recurrence_residual(k, n).unwrap(), Rational::ratio(0, 1), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn mixed_moment_fixtures() {
        let mut t = MomentTable::new();
        // l = 0 reduces to the central moment; l = 1, k = 0 to the mean.
        assert_eq!(t.mixed(0, 2, 4).unwrap(), t.central(2, 4));
        assert_eq!(t.mixed(1, 0, 4).unwrap(), rat(6, 5));
        // Independent oracle: expectation over the enumerated 6-leaf law.
        let law = enumerated_count_law(2, 6);
        let by_hand = Rational::sum(law.atoms().iter().map(|(v, p)| {
            p.clone() * v.clone() * (v.clone() - rat(3, 2))
        }));
        assert_eq!(t.mixed(1, 1, 6).unwrap(), by_hand);
    }

    #[test]
    fn pgf_derivatives_match_raw_moments() {
        // Finite differences of E[e^{tS_2}] at t = 0 against the recursion.
        let mut t = MomentTable::new();
        for n in 2..=50 {
            let m = |tt: f64| pgf_s2::<f64>(n, &tt.exp()).unwrap().hypergeometric;
            let h1 = 1e-6;
            let d1 = (m(h1) - m(-h1)) / (2.0 * h1);
            let want1 = t.raw(1, n).to_f64();
            assert!((d1 - want1).abs() <= 1e-6 * want1, "first derivative n={n}");
            let h2 = 1e-4;
            let d2 = (m(h2) - 2.0 * m(0.0) + m(-h2)) / (h2 * h2);
            let want2 = t.raw(2, n).to_f64();
            assert!((d2 - want2).abs() <= 1e-4 * want2, "second derivative n={n}");
        }
    }

    #[test]
    fn scan_matches_moment_table_exactly() {
        let mut scan = MomentScan::<Rational>::new();
        let mut t = MomentTable::new();
        for n in [4usize, 9, 24] {
            for k in 0..=4 {
                assert_eq!(
                    scan.measured(&ScanTarget::CountCentered { r: 1, k }, n).unwrap(),
                    t.central(k, n),
                    "central k={k} n={n}"
                );
                assert_eq!(
                    scan.measured(&ScanTarget::NegativeS2 { k }, n).unwrap(),
                    t.negative(k, n).unwrap(),
                    "negative k={k} n={n}"
                );
            }
            for l in 0..=3 {
                for k in 0..=3 {
                    assert_eq!(
                        scan.measured(&ScanTarget::MixedS2 { l, k }, n).unwrap(),
                        t.mixed(l, k, n).unwrap(),
                        "mixed l={l} k={k} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn scan_count_tables_match_law_moments() {
        // The lifted raw tables must agree with moments of the exact law.
        let mut scan = MomentScan::<Rational>::new();
        let mut cache = DistCache::<Rational>::new();
        for n in [8usize, 13, 20] {
            for r in 2..=3u32 {
                for k in 0..=4 {
                    let measured =
                        scan.measured(&ScanTarget::CountCentered { r, k }, n).unwrap();
                    let d = cache.dist_s(r + 1, n).unwrap();
                    let center = rat(n as i64, 4i64.pow(r));
                    let direct = expect(&d, &MomentFn::centered_power(&center, k)).unwrap();
                    assert_eq!(measured, direct, "r={r} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn scan_ratio_tables_match_law_moments() {
        let mut scan = MomentScan::<Rational>::new();
        let mut cache = DistCache::<Rational>::new();
        for (q, r) in [(1u32, 1u32), (1, 2), (2, 1), (2, 2), (3, 1)] {
            for n in [6usize, 11, 16] {
                for k in 0..=3 {
                    let measured =
                        scan.measured(&ScanTarget::RatioCentered { q, r, k }, n).unwrap();
                    let d = dist_ratio(&mut cache, q, r, n).unwrap();
                    let center = Rational::ratio(1, 4i64.pow(r));
                    let direct = expect(&d, &MomentFn::centered_power(&center, k)).unwrap();
                    assert_eq!(measured, direct, "q={q} r={r} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn float_scan_tracks_exact_scan() {
        let mut exact = MomentScan::<Rational>::new();
        let mut float = MomentScan::<f64>::new();
        let targets = [
            ScanTarget::CountCentered { r: 1, k: 4 },
            ScanTarget::CountCentered { r: 2, k: 3 },
            ScanTarget::NegativeS2 { k: 2 },
            ScanTarget::MixedS2 { l: 2, k: 2 },
            ScanTarget::RatioCentered { q: 2, r: 1, k: 2 },
            ScanTarget::RatioCentered { q: 1, r: 2, k: 3 },
        ];
        for target in targets {
            let e = exact.measured(&target, 64).unwrap().to_f64();
            let f = float.measured(&target, 64).unwrap();
            assert!((e - f).abs() <= 1e-9 * e.abs().max(1e-12), "{target}: {e} vs {f}");
        }
    }

    #[test]
    fn asymptote_fixtures() {
        // Second-order variance-like moment: coefficient 1/16, growth n.
        let a = ScanTarget::CountCentered { r: 1, k: 2 }.asymptote();
        assert_eq!(a.coefficient, rat(1, 16));
        assert_eq!(a.power, 1);
        assert!(a.brackets.is_none());
        // First-order reciprocal: 4/n.
        let a = ScanTarget::NegativeS2 { k: 1 }.asymptote();
        assert_eq!(a.coefficient, rat(4, 1));
        assert_eq!(a.power, -1);
        // Odd count family at r = 1 carries bracket 1 and no ambiguity.
        let a = ScanTarget::CountCentered { r: 1, k: 3 }.asymptote();
        assert_eq!(a.coefficient, rat(3, 2) * rat(1, 64));
        assert_eq!(a.power, 1);
        assert!(a.brackets.is_none());
        // Gap-2 odd ratio carries the two bracket readings.
        let a = ScanTarget::RatioCentered { q: 1, r: 2, k: 1 }.asymptote();
        let b = a.brackets.expect("ambiguous bracket");
        assert_eq!(b.statement, rat(1, 5) * (rat(21, 1) + rat(1, 1) * rat(4, 1)));
        assert_eq!(b.shifted, rat(1, 5) * (rat(5, 1) + rat(0, 1)));
        // Even ratio at the consecutive-order point: variance scale 4^{r-3}.
        let a = ScanTarget::consecutive_ratio(2, 2).asymptote();
        assert_eq!(a.coefficient, rat(1, 4));
        assert_eq!(a.power, -1);
    }

    #[test]
    fn bracket_is_one_at_unit_gap() {
        for s in 0..=3 {
            assert_eq!(bracket_statement(1, s), Rational::one(), "s={s}");
        }
    }

    #[test]
    fn trivial_scan_ratio_is_one() {
        let mut scan = MomentScan::<f64>::new();
        let check = asymptotic_check(
            &mut scan,
            ScanTarget::CountCentered { r: 1, k: 0 },
            &[16, 64, 256],
        )
        .unwrap();
        for row in &check.rows {
            assert!((row.ratio - 1.0).abs() < 1e-12, "{row:?}");
        }
        assert!(check.in_band(0.99, 1.01));
        assert!(check.drifts_toward_one(3, 1e-3));
    }

    #[test]
    fn reciprocal_scan_converges_on_small_grid() {
        let mut scan = MomentScan::<f64>::new();
        let check =
            asymptotic_check(&mut scan, ScanTarget::NegativeS2 { k: 1 }, &[64, 128, 256, 512])
                .unwrap();
        assert!(check.in_band(0.95, 1.05), "{:?}", check.rows);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut scan = MomentScan::<f64>::new();
        let err = asymptotic_check(&mut scan, ScanTarget::NegativeS2 { k: 1 }, &[]).unwrap_err();
        assert_eq!(err, MomentError::EmptyGrid);
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1), 1);
        assert_eq!(double_factorial(0), 1);
        assert_eq!(double_factorial(1), 1);
        assert_eq!(double_factorial(5), 15);
        assert_eq!(double_factorial(7), 105);
        assert_eq!(double_factorial(6), 48);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(7, 7), 1);
    }

    #[test]
    fn target_display_names() {
        assert_eq!(ScanTarget::CountCentered { r: 2, k: 3 }.to_string(), "E[(S_3 - n/4^2)^3]");
        assert_eq!(ScanTarget::NegativeS2 { k: 2 }.to_string(), "E[S_2^-2]");
        assert_eq!(ScanTarget::MixedS2 { l: 1, k: 2 }.to_string(), "E[S_2^1 (S_2 - n/4)^2]");
        assert_eq!(
            ScanTarget::RatioCentered { q: 2, r: 1, k: 4 }.to_string(),
            "E[(S_3/S_2 - 4^-1)^4]"
        );
    }
}
