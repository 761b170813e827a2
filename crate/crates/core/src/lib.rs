//! Branch statistics of uniformly random full binary trees under
//! Horton–Strahler ordering.
//!
//! The crate computes exact finite-`n` laws of branch counts `S_r` and of
//! branch-count ratios `S_{q+r}/S_q` by a transition-kernel recursion, checks
//! them against closed-form moment identities and a terminating Gauss
//! hypergeometric form of the generating function, scans asymptotic moment
//! predictions, and verifies the limiting normal fluctuation laws by
//! deterministic parallel Monte Carlo.
//!
//! Everything numeric is generic over [`Scalar`]: exact big-rational
//! arithmetic by default, `f64` for large-magnitude scans.

pub mod exact;
pub mod hypergeom;
pub mod moments;
pub mod montecarlo;
pub mod scalar;
pub mod trees;
pub mod verify;

pub use scalar::Scalar;

/// Exact rational scalar used throughout the default backend.
pub type Rational = num_rational::BigRational;

/// Finitely supported distribution with exact rational atoms.
pub type ExactDist = exact::Dist<Rational>;

/// Finitely supported distribution in the `f64` backend.
pub type FloatDist = exact::Dist<f64>;
