//! Coefficients of the reciprocal logarithm series.
//!
//! With `L(t) = -ln(1-t)`, the function `t/L(t)` is analytic on `|t| < 1`
//! and expands as `Σ c_k t^k` with `c_0 = 1`, `c_1 = -1/2`, `c_2 = -1/12`,
//! `c_3 = -1/24`, every later coefficient negative as well. These
//! coefficients and their partial sums `d_k = c_0 + … + c_k` are the local
//! data behind the Euler products and per-prime derivative formulas in
//! [`crate::euler`].
//!
//! Dividing `1` by `L(t)/t = Σ t^k/(k+1)` gives the recurrence
//!
//! ```text
//! Σ_{j=0..n} c_j / (n + 1 - j)  =  [n == 0]
//! ```
//!
//! which both evaluation modes implement:
//!
//! - float, up to [`FLOAT_N_MAX`] terms (quadratic cost, so the high end is
//!   expensive; practical use stays in the hundreds);
//! - exact rationals, up to [`EXACT_N_MAX`] terms — the oracle the float
//!   mode is cross-checked against.

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Cap for the float recurrence.
pub const FLOAT_N_MAX: usize = 1_000_000;

/// Cap for the exact rational recurrence (denominators grow fast).
pub const EXACT_N_MAX: usize = 64;

/// Float coefficients `c_0..=c_n_max` with cumulative sums `d_k`.
#[derive(Clone, Debug)]
pub struct GregorySeries {
    pub n_max: usize,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// Run the float recurrence up to `n_max` (inclusive).
pub fn gregory_coefficients(n_max: usize) -> Result<GregorySeries> {
    if n_max > FLOAT_N_MAX {
        return Err(Error::Cap {
            what: "series length",
            requested: n_max as u64,
            cap: FLOAT_N_MAX as u64,
        });
    }
    let mut c = vec![0.0f64; n_max + 1];
    c[0] = 1.0;
    for n in 1..=n_max {
        let mut acc = KahanSum::new();
        for (j, cj) in c[..n].iter().enumerate() {
            acc.add(cj / (n + 1 - j) as f64);
        }
        c[n] = -acc.value();
    }
    let mut d = Vec::with_capacity(n_max + 1);
    let mut acc = KahanSum::new();
    for &ck in &c {
        acc.add(ck);
        d.push(acc.value());
    }
    Ok(GregorySeries { n_max, c, d })
}

/// Run the recurrence in exact arithmetic; returns `c_0..=c_n_max`.
pub fn gregory_coefficients_exact(n_max: usize) -> Result<Vec<BigRational>> {
    if n_max > EXACT_N_MAX {
        return Err(Error::Cap {
            what: "exact series length",
            requested: n_max as u64,
            cap: EXACT_N_MAX as u64,
        });
    }
    let ratio = |num: i64, den: u64| {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    };
    let mut c = vec![BigRational::zero(); n_max + 1];
    c[0] = ratio(1, 1);
    for n in 1..=n_max {
        let mut acc = BigRational::zero();
        for (j, cj) in c.iter().enumerate().take(n) {
            acc += cj * ratio(1, (n + 1 - j) as u64);
        }
        c[n] = -acc;
    }
    Ok(c)
}

/// Absolute tail sum `S_N = Σ_{k=1..N} |c_k|`; grows towards 1 like
/// `1 - O(1/ln N)`.
pub fn gregory_tail_sum(n_max: usize) -> Result<f64> {
    let series = gregory_coefficients(n_max)?;
    let mut acc = KahanSum::new();
    for &ck in &series.c[1..] {
        acc.add(ck.abs());
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn first_exact_coefficients() {
        let c = gregory_coefficients_exact(4).unwrap();
        assert_eq!(c[0], ratio(1, 1));
        assert_eq!(c[1], ratio(-1, 2));
        assert_eq!(c[2], ratio(-1, 12));
        assert_eq!(c[3], ratio(-1, 24));
        assert_eq!(c[4], ratio(-19, 720));
    }

    #[test]
    fn float_matches_exact_through_64() {
        let exact = gregory_coefficients_exact(EXACT_N_MAX).unwrap();
        let float = gregory_coefficients(EXACT_N_MAX).unwrap();
        for (k, (cf, ce)) in float.c.iter().zip(exact.iter()).enumerate() {
            let ce: f64 = ce.numer().to_string().parse::<f64>().unwrap()
                / ce.denom().to_string().parse::<f64>().unwrap();
            assert!((cf - ce).abs() < 1e-13, "c_{k}: {cf} vs {ce}");
        }
    }

    #[test]
    fn sign_and_monotonicity_invariants() {
        let s = gregory_coefficients(2_000).unwrap();
        assert_eq!(s.c[0], 1.0);
        assert_eq!(s.d[1], 0.5);
        for k in 1..=2_000 {
            assert!(s.c[k] < 0.0, "c_{k} should be negative");
            assert!(s.d[k] > 0.0, "d_{k} should be positive");
            assert!(s.d[k] < s.d[k - 1], "d_k should decrease");
            assert!(s.d[k].abs() <= 2.0);
        }
    }

    #[test]
    fn tail_sum_values() {
        assert_eq!(gregory_tail_sum(1).unwrap(), 0.5);
        let s = gregory_tail_sum(200).unwrap();
        assert!(s > 0.5 && s < 1.0);
    }

    #[test]
    fn caps_enforced() {
        assert!(gregory_coefficients(FLOAT_N_MAX + 1).is_err());
        assert!(gregory_coefficients_exact(EXACT_N_MAX + 1).is_err());
    }

    #[test]
    fn degenerate_length() {
        let s = gregory_coefficients(0).unwrap();
        assert_eq!(s.c, vec![1.0]);
        assert_eq!(s.d, vec![1.0]);
    }
}
