//! Exact finite-`n` laws of branch counts and branch-count ratios.
//!
//! Everything rests on the magnitude transition kernel `w_n(m)`: the
//! probability that a uniform tree of magnitude `n` has `m` second-order
//! branches, which is also the law of the magnitude of the tree obtained by
//! pruning to orders ≥ 2. Laws of higher orders follow by iterating the
//! kernel as a mixture; ratio laws push those forward.
//!
//! The kernel weight closed form is a ratio of factorials; both construction
//! routes here use running products of small factors instead, which keeps
//! big-rational numerators reduced and avoids `f64` overflow/underflow until
//! the weights themselves are subnormal.

use crate::scalar::Scalar;
use crate::Rational;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::rc::Rc;
use thiserror::Error;

/// Errors from exact-law computations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    /// Magnitude below the smallest the operation is defined for.
    #[error("magnitude must be at least {min}, got {n}")]
    MagnitudeTooSmall {
        /// Requested magnitude.
        n: usize,
        /// Smallest accepted magnitude.
        min: usize,
    },
    /// Negative moment of a distribution that charges zero.
    #[error("negative power is undefined on a distribution with an atom at zero")]
    NegativePowerAtZero,
}

/// Ratio `w_n(m+1) / w_n(m)` of consecutive kernel weights.
fn step_ratio<T: Scalar>(n: usize, m: usize) -> T {
    T::ratio(((n - 2 * m) * (n - 2 * m - 1)) as i64, (4 * m * (m + 1)) as i64)
}

/// Probability that a uniform tree of magnitude `n` has exactly `m`
/// second-order branches; zero outside `1 ≤ m ≤ n/2`. Requires `n ≥ 2`.
pub fn transition_prob(n: usize, m: usize) -> Result<Rational, ExactError> {
    if n < 2 {
        return Err(ExactError::MagnitudeTooSmall { n, min: 2 });
    }
    if m < 1 || m > n / 2 {
        return Ok(Rational::ratio(0, 1));
    }
    // w_n(1) = 2^{n-2} n! (n-1)! / (2n-2)!, assembled from bounded factors.
    let mut w = Rational::ratio(1, 2);
    for k in 0..=(n - 2) {
        w *= Rational::ratio((2 * (k + 2)) as i64, (n + k) as i64);
    }
    for j in 1..m {
        w *= step_ratio::<Rational>(n, j);
    }
    Ok(w)
}

/// The transition kernel `w_n(·)` for one magnitude, in either backend.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    n: usize,
    weights: Vec<T>,
}

impl<T: Scalar> Kernel<T> {
    /// Builds the kernel for magnitude `n ≥ 2`.
    ///
    /// Weights are generated from the consecutive-weight ratio starting at
    /// the mode and normalized by their sum. In exact arithmetic this equals
    /// the closed form (the true weights satisfy the same ratios and sum to
    /// one); in `f64` it keeps every intermediate in range, with far tails
    /// flushing harmlessly to zero.
    pub fn new(n: usize) -> Result<Self, ExactError> {
        if n < 2 {
            return Err(ExactError::MagnitudeTooSmall { n, min: 2 });
        }
        let half = n / 2;
        let mut weights = vec![T::zero(); half];
        let peak = (n / 4).clamp(1, half);
        weights[peak - 1] = T::one();
        for m in peak..half {
            weights[m] = weights[m - 1].clone() * step_ratio::<T>(n, m);
        }
        for m in (1..peak).rev() {
            weights[m - 1] = weights[m].clone() / step_ratio::<T>(n, m);
        }
        let total = T::sum(weights.iter().cloned());
        for w in &mut weights {
            *w = w.clone() / total.clone();
        }
        Ok(Kernel { n, weights })
    }

    /// Magnitude this kernel transitions from.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Weights for `m = 1..=n/2`; index `m - 1`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Weight of a single `m`; zero outside the support.
    pub fn weight(&self, m: usize) -> T {
        if m >= 1 && m <= self.weights.len() {
            self.weights[m - 1].clone()
        } else {
            T::zero()
        }
    }

    /// Mixture sum `Σ_m w_n(m) f(m)` over the support.
    pub fn mix(&self, mut f: impl FnMut(usize) -> T) -> T {
        T::sum(self.weights.iter().enumerate().map(|(i, w)| w.clone() * f(i + 1)))
    }
}

/// A finitely supported distribution: atoms `(value, probability)` sorted by
/// value ascending, zero-probability atoms dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist<T> {
    atoms: Vec<(T, T)>,
}

impl<T: Scalar> Dist<T> {
    /// Point mass at `value`.
    pub fn point(value: T) -> Self {
        Dist { atoms: vec![(value, T::one())] }
    }

    /// Assembles a distribution from unsorted atoms, merging duplicates and
    /// dropping zero probabilities. Values must be totally ordered (no NaN).
    pub fn from_atoms(atoms: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut atoms: Vec<(T, T)> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("unordered distribution value"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some((last_v, last_p)) if *last_v == v => *last_p = last_p.clone() + p,
                _ => merged.push((v, p)),
            }
        }
        merged.retain(|(_, p)| !p.is_zero());
        Dist { atoms: merged }
    }

    /// Atoms sorted by value.
    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// True when no atom carries mass (only possible for an empty build).
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of all probabilities.
    pub fn total_mass(&self) -> T {
        T::sum(self.atoms.iter().map(|(_, p)| p.clone()))
    }

    /// Probability of one value; zero if absent.
    pub fn prob(&self, value: &T) -> T {
        self.atoms
            .binary_search_by(|(v, _)| v.partial_cmp(value).expect("unordered value"))
            .map(|i| self.atoms[i].1.clone())
            .unwrap_or_else(|_| T::zero())
    }
}

impl Dist<Rational> {
    /// Fixed JSON schema with exact integer pairs:
    /// `{"support":[{"num":..,"den":..,"p_num":..,"p_den":..},..]}`.
    ///
    /// Values and probabilities are reduced fractions with positive
    /// denominators, so the encoding is canonical and bit-exact.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"support\":[");
        for (i, (v, p)) in self.atoms.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(
                s,
                "{{\"num\":{},\"den\":{},\"p_num\":{},\"p_den\":{}}}",
                v.numer(),
                v.denom(),
                p.numer(),
                p.denom()
            )
            .expect("writing to String cannot fail");
        }
        s.push_str("]}");
        s
    }
}

impl Dist<f64> {
    /// Float analogue of [`Dist::to_json`]:
    /// `{"support":[{"value":..,"p":..},..]}` with shortest-round-trip floats.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"support\":[");
        for (i, (v, p)) in self.atoms.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{{\"value\":{v},\"p\":{p}}}").expect("writing to String cannot fail");
        }
        s.push_str("]}");
        s
    }
}

/// Statistic whose expectation [`expect`] evaluates.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentFn<T> {
    /// `x^k`; negative `k` requires a distribution with no atom at zero.
    Power(i32),
    /// Polynomial with ascending coefficients `c[0] + c[1] x + …`.
    Polynomial(Vec<T>),
}

impl<T: Scalar> MomentFn<T> {
    /// The identity statistic `x`.
    pub fn identity() -> Self {
        MomentFn::Power(1)
    }

    /// `(x - center)^k`, expanded to polynomial coefficients.
    pub fn centered_power(center: &T, k: u32) -> Self {
        let mut coeffs = Vec::with_capacity(k as usize + 1);
        // C(k, j) (-center)^{k-j} x^j; binomials stay in i64 for any k here.
        let mut binom: i64 = 1;
        let neg_c = -center.clone();
        for j in 0..=k {
            coeffs.push(T::from_int(binom) * neg_c.powi((k - j) as i32));
            if j < k {
                binom = binom * (k - j) as i64 / (j + 1) as i64;
            }
        }
        MomentFn::Polynomial(coeffs)
    }
}

/// Expectation of a statistic under a distribution.
pub fn expect<T: Scalar>(dist: &Dist<T>, f: &MomentFn<T>) -> Result<T, ExactError> {
    match f {
        MomentFn::Power(k) => {
            if *k < 0 && dist.atoms.iter().any(|(v, _)| v.is_zero()) {
                return Err(ExactError::NegativePowerAtZero);
            }
            Ok(T::sum(dist.atoms.iter().map(|(v, p)| p.clone() * v.powi(*k))))
        }
        MomentFn::Polynomial(coeffs) => Ok(T::sum(dist.atoms.iter().map(|(v, p)| {
            let mut acc = T::zero();
            for c in coeffs.iter().rev() {
                acc = acc * v.clone() + c.clone();
            }
            p.clone() * acc
        }))),
    }
}

/// Memo for kernels and branch-count laws, keyed by `(r, n)`.
///
/// Hold one per thread (or behind a lock) and reuse it across calls; entries
/// are immutable once inserted, so sharing within a process is safe.
pub struct DistCache<T: Scalar> {
    kernels: HashMap<usize, Rc<Kernel<T>>>,
    // Dense pmf of S_r over j = 0..=n/2^{r-1}, keyed (r, n); r ≥ 2, n ≥ 2.
    pmfs: HashMap<(u32, usize), Rc<Vec<T>>>,
}

impl<T: Scalar> Default for DistCache<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> DistCache<T> {
    /// Empty cache.
    pub fn new() -> Self {
        DistCache { kernels: HashMap::new(), pmfs: HashMap::new() }
    }

    /// Memoized kernel for magnitude `n ≥ 2`.
    pub fn kernel(&mut self, n: usize) -> Result<Rc<Kernel<T>>, ExactError> {
        if let Some(k) = self.kernels.get(&n) {
            return Ok(Rc::clone(k));
        }
        let k = Rc::new(Kernel::new(n)?);
        self.kernels.insert(n, Rc::clone(&k));
        Ok(k)
    }

    /// Law of the order-`r` branch count at magnitude `n` (`r, n ≥ 1`).
    ///
    /// `S_1 = n` exactly; for `r ≥ 2` the law is the `(r - 1)`-fold kernel
    /// mixture, supported on `0..=n/2^{r-1}` with the atom at 0 appearing
    /// once the order can be missing entirely.
    pub fn dist_s(&mut self, r: u32, n: usize) -> Result<Dist<T>, ExactError> {
        assert!(r >= 1, "orders are 1-based");
        if n < 1 {
            return Err(ExactError::MagnitudeTooSmall { n, min: 1 });
        }
        if r == 1 {
            return Ok(Dist::point(T::from_usize(n)));
        }
        if n == 1 {
            return Ok(Dist::point(T::zero()));
        }
        let pmf = self.pmf(r, n)?;
        Ok(Dist::from_atoms(
            pmf.iter().enumerate().map(|(j, p)| (T::from_usize(j), p.clone())),
        ))
    }

    /// Dense pmf for `r ≥ 2`, `n ≥ 2`, filled bottom-up level by level.
    fn pmf(&mut self, r: u32, n: usize) -> Result<Rc<Vec<T>>, ExactError> {
        debug_assert!(r >= 2 && n >= 2);
        if let Some(p) = self.pmfs.get(&(r, n)) {
            return Ok(Rc::clone(p));
        }
        for level in 2..=r {
            // Only the queried magnitude is needed at the top level; below it,
            // every magnitude the next mixture step can reach.
            let mags: Vec<usize> =
                if level == r { vec![n] } else { (2..=(n >> (r - level))).collect() };
            for m in mags {
                if self.pmfs.contains_key(&(level, m)) {
                    continue;
                }
                let pmf = self.pmf_from_below(level, m)?;
                self.pmfs.insert((level, m), Rc::new(pmf));
            }
        }
        Ok(Rc::clone(self.pmfs.get(&(r, n)).expect("just filled")))
    }

    /// One mixture step: law at `(level, m)` from the laws at `level - 1`.
    fn pmf_from_below(&mut self, level: u32, m: usize) -> Result<Vec<T>, ExactError> {
        let kernel = self.kernel(m)?;
        let cap = m >> (level - 1);
        let mut acc = vec![T::zero(); cap + 1];
        if level == 2 {
            for (i, w) in kernel.weights().iter().enumerate() {
                acc[i + 1] = w.clone();
            }
            return Ok(acc);
        }
        for (i, w) in kernel.weights().iter().enumerate() {
            let mm = i + 1;
            if mm == 1 {
                // Magnitude 1 has no branches of order ≥ 2.
                acc[0] = acc[0].clone() + w.clone();
                continue;
            }
            let lower = Rc::clone(self.pmfs.get(&(level - 1, mm)).expect("lower level filled"));
            for (j, p) in lower.iter().enumerate() {
                if !p.is_zero() {
                    acc[j] = acc[j].clone() + w.clone() * p.clone();
                }
            }
        }
        Ok(acc)
    }
}

/// Exact law of the ratio `S_{q+r}/S_q` at magnitude `n ≥ 2`, with the
/// zero-denominator convention that the ratio is 0 when `S_q = 0`.
///
/// Base `q = 1`: the pushforward of the order-`(1 + r)` count law under
/// `j ↦ j/n`. Each further level is the kernel mixture of the level below,
/// mirroring the count recursion; the atom at 0 appears whenever attainable.
pub fn dist_ratio(
    cache: &mut DistCache<Rational>,
    q: u32,
    r: u32,
    n: usize,
) -> Result<Dist<Rational>, ExactError> {
    assert!(q >= 1 && r >= 1, "orders are 1-based and the gap must be positive");
    if n < 2 {
        return Err(ExactError::MagnitudeTooSmall { n, min: 2 });
    }
    let level1 = |cache: &mut DistCache<Rational>, m: usize| -> Result<Vec<(Rational, Rational)>, ExactError> {
        if m == 1 {
            return Ok(vec![(Rational::ratio(0, 1), Rational::ratio(1, 1))]);
        }
        let mag = Rational::from_usize(m);
        Ok(cache
            .dist_s(1 + r, m)?
            .atoms()
            .iter()
            .map(|(j, p)| (j.clone() / mag.clone(), p.clone()))
            .collect())
    };
    if q == 1 {
        return Ok(Dist::from_atoms(level1(cache, n)?));
    }
    // prev[m] holds the level-(ℓ-1) law for magnitude m.
    let mut prev: Vec<Vec<(Rational, Rational)>> = Vec::new();
    for level in 2..=q {
        let max_mag = if level == q { n } else { n >> (q - level) };
        if level == 2 {
            prev = (0..=max_mag / 2)
                .map(|m| if m == 0 { Ok(vec![]) } else { level1(cache, m) })
                .collect::<Result<_, _>>()?;
        }
        let mags: Vec<usize> =
            if level == q { vec![n] } else { (1..=max_mag).collect() };
        let mut next: Vec<Vec<(Rational, Rational)>> = vec![vec![]; max_mag + 1];
        for m in mags {
            if m == 1 {
                next[1] = vec![(Rational::ratio(0, 1), Rational::ratio(1, 1))];
                continue;
            }
            let kernel = cache.kernel(m)?;
            let mut acc: BTreeMap<Rational, Rational> = BTreeMap::new();
            for (i, w) in kernel.weights().iter().enumerate() {
                for (v, p) in &prev[i + 1] {
                    let entry = acc.entry(v.clone()).or_insert_with(|| Rational::ratio(0, 1));
                    *entry = entry.clone() + w.clone() * p.clone();
                }
            }
            next[m] = acc.into_iter().collect();
        }
        if level == q {
            return Ok(Dist::from_atoms(next.swap_remove(n)));
        }
        prev = next;
    }
    unreachable!("loop returns at level == q");
}

// ── Tests ──────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{enumerated_count_law, enumerated_ratio_law};
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn rat(num: i64, den: i64) -> Rational {
        Rational::ratio(num, den)
    }

    #[test]
    fn transition_prob_fixtures() {
        assert_eq!(transition_prob(2, 1).unwrap(), Rational::one());
        assert_eq!(transition_prob(4, 1).unwrap(), rat(4, 5));
        assert_eq!(transition_prob(4, 2).unwrap(), rat(1, 5));
        assert_eq!(transition_prob(5, 1).unwrap(), rat(4, 7));
        assert_eq!(transition_prob(5, 2).unwrap(), rat(3, 7));
        assert_eq!(transition_prob(4, 0).unwrap(), Rational::zero());
        assert_eq!(transition_prob(4, 3).unwrap(), Rational::zero());
        assert_eq!(
            transition_prob(1, 1),
            Err(ExactError::MagnitudeTooSmall { n: 1, min: 1 + 1 })
        );
    }

    #[test]
    fn kernel_matches_closed_form() {
        // Two independent routes: normalized ratio chain vs direct product.
        for n in 2..=60 {
            let kernel = Kernel::<Rational>::new(n).unwrap();
            for m in 1..=n / 2 {
                assert_eq!(kernel.weight(m), transition_prob(n, m).unwrap(), "n={n} m={m}");
            }
            assert_eq!(kernel.weight(0), Rational::zero());
            assert_eq!(kernel.weight(n / 2 + 1), Rational::zero());
        }
    }

    #[test]
    fn float_kernel_tracks_exact() {
        for n in [10usize, 100, 381] {
            let exact = Kernel::<Rational>::new(n).unwrap();
            let float = Kernel::<f64>::new(n).unwrap();
            for m in 1..=n / 2 {
                let e = exact.weight(m).to_f64();
                let f = float.weight(m);
                assert!((e - f).abs() <= 1e-12 * e.max(1e-300), "n={n} m={m}: {e} vs {f}");
            }
        }
    }

    #[test]
    fn kernel_rejects_small_magnitude() {
        assert!(matches!(Kernel::<f64>::new(1), Err(ExactError::MagnitudeTooSmall { .. })));
    }

    #[test]
    fn dist_s_small_fixtures() {
        let mut cache = DistCache::<Rational>::new();
        assert_eq!(cache.dist_s(1, 7).unwrap(), Dist::point(rat(7, 1)));
        assert_eq!(cache.dist_s(3, 1).unwrap(), Dist::point(Rational::zero()));
        let d24 = cache.dist_s(2, 4).unwrap();
        assert_eq!(d24.atoms(), &[(rat(1, 1), rat(4, 5)), (rat(2, 1), rat(1, 5))]);
        // Four of the five 4-leaf trees are combs with no third order.
        let d34 = cache.dist_s(3, 4).unwrap();
        assert_eq!(d34.atoms(), &[(rat(0, 1), rat(4, 5)), (rat(1, 1), rat(1, 5))]);
    }

    #[test]
    fn dist_s_matches_enumeration() {
        let mut cache = DistCache::<Rational>::new();
        for r in 2..=4 {
            for n in 2..=9 {
                assert_eq!(
                    cache.dist_s(r, n).unwrap(),
                    enumerated_count_law(r, n),
                    "r={r} n={n}"
                );
            }
        }
    }

    #[test]
    fn dist_ratio_fixtures() {
        let mut cache = DistCache::<Rational>::new();
        let d = dist_ratio(&mut cache, 1, 1, 4).unwrap();
        assert_eq!(d.atoms(), &[(rat(1, 4), rat(4, 5)), (rat(1, 2), rat(1, 5))]);
        assert!(matches!(
            dist_ratio(&mut cache, 1, 1, 1),
            Err(ExactError::MagnitudeTooSmall { .. })
        ));
    }

    #[test]
    fn dist_ratio_mean_closed_form() {
        // Mean of S_2/n is (n-1)/(2(2n-3)).
        let mut cache = DistCache::<Rational>::new();
        for n in 2..=50 {
            let d = dist_ratio(&mut cache, 1, 1, n).unwrap();
            let mean = expect(&d, &MomentFn::identity()).unwrap();
            let ni = n as i64;
            assert_eq!(mean, rat(ni - 1, 2 * (2 * ni - 3)), "n={n}");
        }
    }

    #[test]
    fn dist_ratio_matches_enumeration() {
        let mut cache = DistCache::<Rational>::new();
        for (q, r) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)] {
            for n in 2..=8 {
                assert_eq!(
                    dist_ratio(&mut cache, q, r, n).unwrap(),
                    enumerated_ratio_law(q, r, n),
                    "q={q} r={r} n={n}"
                );
            }
        }
    }

    #[test]
    fn expect_fixtures() {
        let mut cache = DistCache::<Rational>::new();
        let d = cache.dist_s(2, 4).unwrap();
        assert_eq!(expect(&d, &MomentFn::identity()).unwrap(), rat(6, 5));
        assert_eq!(expect(&d, &MomentFn::Power(2)).unwrap(), rat(8, 5));
        assert_eq!(expect(&d, &MomentFn::Power(-1)).unwrap(), rat(9, 10));
        assert_eq!(expect(&d, &MomentFn::Power(0)).unwrap(), Rational::one());
        // (x - 1)^2 expands through the polynomial path.
        let centered = MomentFn::centered_power(&Rational::one(), 2);
        assert_eq!(expect(&d, &centered).unwrap(), rat(1, 5));
    }

    #[test]
    fn expect_negative_power_rejects_zero_atom() {
        let mut cache = DistCache::<Rational>::new();
        let d = cache.dist_s(3, 4).unwrap();
        assert_eq!(
            expect(&d, &MomentFn::Power(-1)),
            Err(ExactError::NegativePowerAtZero)
        );
    }

    #[test]
    fn centered_power_expansion() {
        let c = rat(3, 2);
        let f = MomentFn::centered_power(&c, 3);
        let MomentFn::Polynomial(coeffs) = &f else { panic!("expected polynomial") };
        // (x - 3/2)^3 = -27/8 + 27/4 x - 9/2 x^2 + x^3
        assert_eq!(coeffs.as_slice(), &[rat(-27, 8), rat(27, 4), rat(-9, 2), rat(1, 1)]);
    }

    #[test]
    fn from_atoms_merges_and_drops() {
        let d = Dist::from_atoms(vec![
            (rat(1, 2), rat(1, 4)),
            (rat(0, 1), rat(1, 2)),
            (rat(1, 2), rat(1, 4)),
            (rat(3, 1), Rational::zero()),
        ]);
        assert_eq!(d.atoms(), &[(rat(0, 1), rat(1, 2)), (rat(1, 2), rat(1, 2))]);
        assert_eq!(d.prob(&rat(1, 2)), rat(1, 2));
        assert_eq!(d.prob(&rat(9, 7)), Rational::zero());
    }

    #[test]
    fn exact_json_golden() {
        let mut cache = DistCache::<Rational>::new();
        let json = cache.dist_s(2, 4).unwrap().to_json();
        assert_eq!(
            json,
            "{\"support\":[{\"num\":1,\"den\":1,\"p_num\":4,\"p_den\":5},\
             {\"num\":2,\"den\":1,\"p_num\":1,\"p_den\":5}]}"
        );
    }

    #[test]
    fn float_json_shape() {
        let d = Dist::from_atoms(vec![(0.25f64, 0.8), (0.5, 0.2)]);
        assert_eq!(d.to_json(), "{\"support\":[{\"value\":0.25,\"p\":0.8},{\"value\":0.5,\"p\":0.2}]}");
    }

    // ── Property tests ─────────────────────────────────────────────────

    proptest! {
        #[test]
        fn kernel_weights_sum_to_one(n in 2usize..=60) {
            let kernel = Kernel::<Rational>::new(n).unwrap();
            let mass = Rational::sum(kernel.weights().iter().cloned());
            prop_assert_eq!(mass, Rational::one());
        }

        #[test]
        fn dist_s_mass_and_support(r in 2u32..=4, n in 2usize..=32) {
            let mut cache = DistCache::<Rational>::new();
            let d = cache.dist_s(r, n).unwrap();
            prop_assert_eq!(d.total_mass(), Rational::one());
            let cap = Rational::from_usize(n >> (r - 1));
            for (v, p) in d.atoms() {
                prop_assert!(!p.is_zero());
                prop_assert!(*v >= Rational::zero() && *v <= cap);
            }
            // The second order is always present for n ≥ 2.
            if r == 2 {
                prop_assert!(d.prob(&Rational::zero()).is_zero());
            }
        }

        #[test]
        fn dist_ratio_mass_and_support(q in 1u32..=2, r in 1u32..=2, n in 2usize..=16) {
            let mut cache = DistCache::<Rational>::new();
            let d = dist_ratio(&mut cache, q, r, n).unwrap();
            prop_assert_eq!(d.total_mass(), Rational::one());
            let cap = Rational::ratio(1, 1 << r);
            for (v, _) in d.atoms() {
                prop_assert!(*v >= Rational::zero() && *v <= cap);
            }
        }
    }
}
