//! Terminating Gauss series ₂F₁ and the probability generating function of
//! the second-order branch count.
//!
//! `E[x^{S_2}]` at magnitude `n` has a closed form: the smallest kernel
//! weight times `x` times a terminating ₂F₁ whose upper parameters are
//! `(2-n)/2` and `(3-n)/2` and whose lower parameter is 2. One of the upper
//! parameters is always a non-positive integer, so the series is a
//! polynomial of degree `⌊n/2⌋ - 1` and every quantity here is exact in the
//! rational backend. The module evaluates the closed form and the defining
//! sum `Σ_m w_n(m) x^m` independently so callers can compare them.

use crate::exact::{ExactError, Kernel};
use crate::scalar::Scalar;
use crate::Rational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Errors from series evaluation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypError {
    /// Neither upper parameter is a non-positive integer.
    #[error("series does not terminate: neither upper parameter is a non-positive integer")]
    NonTerminating,
    /// The lower parameter is a non-positive integer.
    #[error("lower parameter must not be a non-positive integer")]
    SingularLowerParameter,
    /// Propagated magnitude errors.
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Parameters of `₂F₁(a, b; c; z)` with exact parameters and a backend
/// argument.
#[derive(Clone, Debug, PartialEq)]
pub struct HypParams<T> {
    /// First upper parameter.
    pub a: Rational,
    /// Second upper parameter.
    pub b: Rational,
    /// Lower parameter.
    pub c: Rational,
    /// Series argument.
    pub z: T,
}

/// Degree at which the series terminates, if it does: the smallest `-p` over
/// upper parameters `p` that are non-positive integers.
fn termination_degree(a: &Rational, b: &Rational) -> Option<usize> {
    let degree_of = |p: &Rational| -> Option<usize> {
        if p.is_integer() && !p.numer().is_positive() {
            (-p.to_integer()).to_usize()
        } else {
            None
        }
    };
    match (degree_of(a), degree_of(b)) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) => Some(x),
        (None, Some(y)) => Some(y),
        (None, None) => None,
    }
}

/// Evaluates a terminating `₂F₁` by the term-ratio recurrence
/// `t_{j+1} = t_j · (a+j)(b+j) / ((c+j)(1+j)) · z`.
pub fn hyp2f1_terminating<T: Scalar>(params: &HypParams<T>) -> Result<T, HypError> {
    let degree = termination_degree(&params.a, &params.b).ok_or(HypError::NonTerminating)?;
    if params.c.is_integer() && !params.c.numer().is_positive() {
        return Err(HypError::SingularLowerParameter);
    }
    let mut term = T::one();
    let mut sum = T::one();
    for j in 0..degree {
        let jr = Rational::from_int(j as i64);
        let factor = (params.a.clone() + jr.clone()) * (params.b.clone() + jr.clone())
            / ((params.c.clone() + jr.clone()) * (jr + Rational::from_int(1)));
        term = term * T::from_rational(&factor) * params.z.clone();
        sum = sum + term.clone();
    }
    Ok(sum)
}

/// Smallest-count kernel weight `w_n(1)` as a running product of bounded
/// factors, in either backend. Requires `n ≥ 2`.
fn smallest_count_weight<T: Scalar>(n: usize) -> T {
    let mut w = T::ratio(1, 2);
    for k in 0..=(n - 2) {
        w = w * T::ratio((2 * (k + 2)) as i64, (n + k) as i64);
    }
    w
}

/// Upper/lower parameters of the generating-function series at magnitude `n`.
fn pgf_params<T: Scalar>(n: usize, x: T) -> HypParams<T> {
    HypParams {
        a: Rational::ratio(2 - n as i64, 2),
        b: Rational::ratio(3 - n as i64, 2),
        c: Rational::from_int(2),
        z: x,
    }
}

/// Both routes to `E[x^{S_2}]` at one magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct PgfEval<T> {
    /// Closed form: `w_n(1) · x · ₂F₁((2-n)/2, (3-n)/2; 2; x)`.
    pub hypergeometric: T,
    /// Defining sum `Σ_m w_n(m) x^m` over the kernel.
    pub direct: T,
}

impl<T: Scalar> PgfEval<T> {
    /// `hypergeometric - direct`; exactly zero in the rational backend.
    pub fn residual(&self) -> T {
        self.hypergeometric.clone() - self.direct.clone()
    }
}

/// Evaluates `E[x^{S_2}]` at magnitude `n ≥ 2` by both routes.
///
/// In the `f64` backend the closed-form route underflows for `n ≳ 1070`
/// (the prefactor is of order `2^-n`); the exact backend has no such limit.
pub fn pgf_s2<T: Scalar>(n: usize, x: &T) -> Result<PgfEval<T>, HypError> {
    if n < 2 {
        return Err(ExactError::MagnitudeTooSmall { n, min: 2 }.into());
    }
    let kernel = Kernel::<T>::new(n)?;
    let direct = kernel.mix(|m| x.powi(m as i32));
    let series = hyp2f1_terminating(&pgf_params(n, x.clone()))?;
    let hypergeometric = smallest_count_weight::<T>(n) * x.clone() * series;
    Ok(PgfEval { hypergeometric, direct })
}

/// Residual of the contiguous-parameter derivative identity at magnitude
/// `n ≥ 3`; exactly zero when the identity holds.
///
/// With `F(x) = ₂F₁((2-n)/2, (3-n)/2; 2; x) = Σ_j c_j x^j`, the identity is
///
/// `Σ_j j·c_j x^j = ((n-2)/2) · [F(x) - ₂F₁((3-n)/2, (4-n)/2; 2; x)]`,
///
/// which packages `x F'(x)` without differentiating: the shifted series has
/// both upper parameters advanced by a half step.
pub fn derivative_identity_residual(n: usize, x: &Rational) -> Result<Rational, HypError> {
    if n < 3 {
        return Err(ExactError::MagnitudeTooSmall { n, min: 3 }.into());
    }
    let base = pgf_params::<Rational>(n, x.clone());
    let degree = termination_degree(&base.a, &base.b).expect("upper parameter is integral");
    // Left side, term by term through the same recurrence.
    let mut term = Rational::from_int(1);
    let mut weighted = Rational::zero();
    for j in 0..degree {
        let jr = Rational::from_int(j as i64);
        let factor = (base.a.clone() + jr.clone()) * (base.b.clone() + jr.clone())
            / ((base.c.clone() + jr.clone()) * (jr + Rational::from_int(1)));
        term = term * factor * x.clone();
        weighted += Rational::from_int(j as i64 + 1) * term.clone();
    }
    let f = hyp2f1_terminating(&base)?;
    let shifted = hyp2f1_terminating(&HypParams {
        a: Rational::ratio(3 - n as i64, 2),
        b: Rational::ratio(4 - n as i64, 2),
        c: Rational::from_int(2),
        z: x.clone(),
    })?;
    let rhs = Rational::ratio(n as i64 - 2, 2) * (f - shifted);
    Ok(weighted - rhs)
}

// ── Tests ──────────────────────────────────────────────────────────────
