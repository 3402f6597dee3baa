//! Numerical toolkit for divisor-function statistics over shifted primes.
//!
//! The crate is organised as a pipeline that turns raw sieve data into
//! analytic verdicts:
//!
//! - [`arith`] — segmented sieves producing τ (divisor counts), μ, ω and
//!   least-prime-factor tables, plus exact factorisation helpers.
//! - [`gregory`] — coefficients of the reciprocal logarithm series
//!   `t / (-ln(1-t))`, in float and exact rational form, with tail sums.
//! - [`euler`] — real-axis ζ evaluation, the prime zeta function,
//!   tail-accelerated Euler products, and the derivative stack for the
//!   local factors attached to restricted 1/τ sums.
//! - [`selberg`] — one-dimensional Selberg sieve weights with brute-force
//!   identity checks and remainder diagnostics.
//! - [`sums`] — checkpointed divisor-reciprocal sums over primes and
//!   integers, with a deterministic parallel reduction.
//!
//! ```
//! // 1/τ(3) + 1/τ(4) + 1/τ(6) + 1/τ(8) over the primes p ≤ 10, shift 1.
//! let rows = tausum::sums::phi_sum(1, 10, &[10]).unwrap();
//! assert!((rows[0].value - 4.0 / 3.0).abs() < 1e-15);
//! ```

pub mod arith;
pub mod error;
pub mod euler;
pub mod gregory;
pub mod kahan;
pub mod selberg;
pub mod sums;

mod pseries;

pub use error::{Error, Result};
pub use kahan::KahanSum;
