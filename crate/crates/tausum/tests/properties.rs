//! Property-based checks over the arithmetic kernels plus seeded statistical
//! sweeps whose observed extremes are frozen as regression ceilings.

use proptest::prelude::*;
use tausum::{arith, euler, selberg};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic 64-bit stream (splitmix64) for the frozen sweeps.
fn next_rand(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

proptest! {
    /// τ, φ, μ and ω split over coprime arguments.
    #[test]
    fn multiplicative_functions_split_over_coprime_parts(
        m in 1u64..=1_000,
        n in 1u64..=1_000,
    ) {
        prop_assume!(gcd(m, n) == 1);
        let fm = arith::factorize(m).unwrap();
        let fnn = arith::factorize(n).unwrap();
        let fmn = arith::factorize(m * n).unwrap();
        prop_assert_eq!(fmn.tau(), fm.tau() * fnn.tau());
        prop_assert_eq!(fmn.phi(), fm.phi() * fnn.phi());
        prop_assert_eq!(fmn.mu(), fm.mu() * fnn.mu());
        prop_assert_eq!(fmn.omega(), fm.omega() + fnn.omega());
    }

    /// A factorization multiplies back to its input, with ascending primes
    /// and positive exponents.
    #[test]
    fn factorization_reconstructs_its_input(n in 1u64..=1_000_000_000) {
        let f = arith::factorize(n).unwrap();
        let mut product = 1u64;
        let mut previous = 0u64;
        for &(p, e) in &f.factors {
            prop_assert!(p > previous, "prime factors must ascend");
            prop_assert!(e >= 1);
            product *= p.pow(e);
            previous = p;
        }
        prop_assert_eq!(product, n);
    }

    /// Segment tables agree entry-for-entry with direct trial division.
    #[test]
    fn segment_tables_match_direct_factorization(lo in 2u64..=1_000_000) {
        let seg = arith::build_segment(lo, lo + 16).unwrap();
        for n in lo..lo + 16 {
            let f = arith::factorize(n).unwrap();
            prop_assert_eq!(u64::from(seg.tau(n)), f.tau());
            prop_assert_eq!(seg.mu(n), f.mu());
            prop_assert_eq!(u32::from(seg.omega(n)), f.omega());
            let is_prime = f.factors.len() == 1 && f.factors[0].1 == 1;
            prop_assert_eq!(seg.is_prime(n), is_prime);
        }
    }
}

/// For every squarefree d up to 10^5 and each ε in the grid, the prime
/// divisors of d obey Σ_{p | d} p^{-(1-ε)} ≤ 2 ω(d)^ε / ε.
#[test]
fn prime_divisor_sums_obey_the_epsilon_bound() {
    let grid = [0.1f64, 0.3, 0.5, 0.9];
    for d in 1u64..=100_000 {
        let f = arith::factorize(d).unwrap();
        if !f.is_squarefree() {
            continue;
        }
        let omega = f.omega() as f64;
        for &eps in &grid {
            let lhs: f64 = f
                .factors
                .iter()
                .map(|&(p, _)| (p as f64).powf(eps - 1.0))
                .sum();
            let rhs = 2.0 * omega.powf(eps) / eps;
            assert!(
                lhs <= rhs + 1e-12,
                "d = {d}, ε = {eps}: {lhs} exceeds {rhs}"
            );
        }
    }
}

/// Frozen observed ceiling for |J_d^(l)(1)| / (ω(d)+2)^10 over the seeded
/// sample below (measured maximum 1.6935e-5 at d = 891559, l ≤ 3).  The
/// derivative growth in the local-factor product stays far inside the
/// tenth-power envelope; the constant pins that margin with ~30% slack.
const J_RATIO_CEILING: f64 = 2.2e-5;

#[test]
fn j_derivative_ratios_stay_inside_the_frozen_envelope() {
    let mut state = 0x5eed_0123_4567_89abu64;
    let mut seen = 0usize;
    let mut max_ratio = 0.0f64;
    let mut arg_max = 0u64;
    while seen < 200 {
        let d = 2 + next_rand(&mut state) % 999_999;
        let f = arith::factorize(d).unwrap();
        if !f.is_squarefree() {
            continue;
        }
        seen += 1;
        let derivs = euler::j_derivatives(d, 3).unwrap();
        let envelope = euler::kappa(d).unwrap();
        for &v in &derivs {
            let ratio = v.abs() / envelope;
            if ratio > max_ratio {
                max_ratio = ratio;
                arg_max = d;
            }
            assert!(
                ratio <= J_RATIO_CEILING,
                "d = {d}: ratio {ratio} above the frozen ceiling"
            );
        }
    }
    println!("max |J^(l)|/envelope ratio {max_ratio:.6e} at d = {arg_max}");
    const { assert!(J_RATIO_CEILING <= 1.0) };
    // Keep the frozen ceiling honest: it must sit near the observed extreme.
    assert!(
        max_ratio > 0.25 * J_RATIO_CEILING,
        "ceiling is loose: observed {max_ratio}"
    );
}

/// The squared sieve form dominates the coprimality indicator pointwise.
#[test]
fn sieve_square_majorizes_the_coprimality_indicator() {
    let ctx = selberg::build_context(1, 30).unwrap();
    let wt = selberg::weights(&ctx).unwrap();
    let mut state = 0x00c0_ffee_5a5a_1234u64;
    for _ in 0..10_000 {
        let n = 1 + next_rand(&mut state) % 1_000_000;
        let square = selberg::majorant_at(&ctx, &wt, n);
        assert!(square >= 0.0);
        let coprime = ctx.primes.iter().all(|&p| !n.is_multiple_of(p));
        if coprime {
            assert!(
                square >= 1.0 - 1e-9,
                "n = {n}: square {square} fails to cover the indicator"
            );
        }
    }
}
