//! Cross-module agreement: independent routes to the same quantity must
//! coincide.  Each test pits two implementations with no shared code path
//! against each other (series vs closed form, sieve vs enumeration,
//! analytic product vs lattice sum).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use tausum::euler::{self, PrecisionBudget};
use tausum::gregory;
use tausum::{arith, selberg, sums};

fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    let scale = want.abs().max(1.0);
    assert!(
        (got - want).abs() <= tol * scale,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}

/// Defining recurrence of the reciprocal-log coefficients: exactly zero in
/// rational arithmetic, ≤ 1e-12 in float arithmetic.
#[test]
fn gregory_recurrence_residuals() {
    let exact = gregory::gregory_coefficients_exact(64).unwrap();
    for n in 0..=64usize {
        let mut acc = BigRational::zero();
        for (j, c) in exact.iter().take(n + 1).enumerate() {
            acc += c / BigRational::from_integer(BigInt::from((n + 1 - j) as i64));
        }
        let want = if n == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
        assert_eq!(acc, want, "rational recurrence residual at n = {n}");
    }

    let float = gregory::gregory_coefficients(400).unwrap();
    for n in 0..=400usize {
        let mut acc = 0.0f64;
        for (j, c) in float.c.iter().take(n + 1).enumerate() {
            acc += c / (n + 1 - j) as f64;
        }
        let want = if n == 0 { 1.0 } else { 0.0 };
        assert!(
            (acc - want).abs() <= 1e-12,
            "float recurrence residual {} at n = {n}",
            acc - want
        );
    }
}

/// The generating functions the coefficient tables came from: the c-series
/// sums to t/(-ln(1-t)) and the cumulative d-series to -t/((1-t)ln(1-t)).
#[test]
fn gregory_series_match_their_generating_functions() {
    let series = gregory::gregory_coefficients(200).unwrap();
    for &x in &[0.1f64, 0.5, -0.5] {
        let c_sum: f64 = series
            .c
            .iter()
            .rev()
            .fold(0.0, |acc, &coeff| acc * x + coeff);
        let d_sum: f64 = series
            .d
            .iter()
            .rev()
            .fold(0.0, |acc, &coeff| acc * x + coeff);
        let log = -(1.0 - x).ln();
        assert_rel(c_sum, x / log, 1e-10, "c-series value");
        assert_rel(d_sum, -x / ((1.0 - x) * (1.0 - x).ln()), 1e-10, "d-series value");
    }
}

/// ζ(s)(s-1) evaluated through the alternating-series route against the
/// Euler–Maclaurin route times (s-1).
#[test]
fn zeta_pole_factor_routes_agree() {
    for &s in &[0.8f64, 1.2, 1.5, 2.0] {
        let scaled = euler::zeta_times_s_minus_1(s).unwrap();
        let direct = euler::zeta_real(s).unwrap() * (s - 1.0);
        assert_rel(scaled, direct, 1e-13, "ζ(s)(s-1)");
    }
    assert_rel(euler::zeta_times_s_minus_1(1.0).unwrap(), 1.0, 1e-12, "pole residue");
}

/// The prime zeta function against a literal sum over sieved primes.
#[test]
fn prime_zeta_matches_direct_prime_sum() {
    let analytic = euler::prime_zeta(2.0).unwrap();
    let direct: f64 = arith::primes_in(2, 1_000_000)
        .unwrap()
        .iter()
        .map(|&p| 1.0 / (p as f64 * p as f64))
        .sum();
    // The omitted tail Σ_{p > 10^6} p^{-2} is below 1e-7.
    assert!(analytic > direct);
    assert!(analytic - direct < 1e-7, "gap {}", analytic - direct);
}

/// Segment primality flags against the standalone prime enumerator on a
/// high window.
#[test]
fn segment_primality_matches_prime_enumeration_high_up() {
    let lo = 1_000_000_000u64;
    let hi = lo + 10_000;
    let seg = arith::build_segment(lo, hi).unwrap();
    let from_mask: Vec<u64> = arith::primes_in(lo, hi).unwrap();
    let from_segment: Vec<u64> = (lo..hi).filter(|&n| seg.is_prime(n)).collect();
    assert_eq!(from_mask, from_segment);
    assert!(!from_mask.is_empty());
}

/// Local sieve densities against the analytic local factor: for squarefree
/// d inside the support, g(d) = J_d(1)/φ(d).
#[test]
fn sieve_density_matches_local_factor_over_totient() {
    let ctx = selberg::build_context(1, 100).unwrap();
    for &d in &[2u64, 3, 6, 10, 15, 30, 77, 210, 2310] {
        let f = arith::factorize(d).unwrap();
        let mut g = 1.0f64;
        for &(p, _) in &f.factors {
            let idx = ctx.primes.binary_search(&p).expect("support prime");
            g *= ctx.g_table[idx];
        }
        let local = euler::j_eval(d, 1.0).unwrap() / f.phi() as f64;
        assert_rel(g, local, 1e-12, "g(d) vs J_d(1)/φ(d)");
    }
}

/// Exact-series derivatives of the local-factor product against central
/// differences of the scalar evaluator.
#[test]
fn j_derivatives_match_central_differences() {
    fn richardson(g: impl Fn(f64) -> f64, h: f64) -> f64 {
        (4.0 * g(h / 2.0) - g(h)) / 3.0
    }
    for &d in &[2u64, 6, 30, 210] {
        let derivs = euler::j_derivatives(d, 3).unwrap();
        let j = |s: f64| euler::j_eval(d, s).unwrap();
        let numeric = [
            j(1.0),
            richardson(|h| (j(1.0 + h) - j(1.0 - h)) / (2.0 * h), 1e-3),
            richardson(|h| (j(1.0 + h) - 2.0 * j(1.0) + j(1.0 - h)) / (h * h), 1e-3),
            richardson(
                |h| {
                    (j(1.0 + 2.0 * h) - 2.0 * j(1.0 + h) + 2.0 * j(1.0 - h)
                        - j(1.0 - 2.0 * h))
                        / (2.0 * h * h * h)
                },
                5e-3,
            ),
        ];
        for (l, (&exact, &approx)) in derivs.iter().zip(&numeric).enumerate() {
            assert_rel(exact, approx, 1e-6, &format!("J^({l}) at d = {d}"));
        }
    }
}

/// The shift factor computed by the constants pipeline is multiplicative
/// over coprime shifts.
#[test]
fn shift_factor_is_multiplicative() {
    let budget = PrecisionBudget::default();
    let beta = |a: u64| euler::constants(a, &budget).unwrap().beta_a;
    let b2 = beta(2);
    let b3 = beta(3);
    let b5 = beta(5);
    assert_rel(beta(6), b2 * b3, 1e-11, "β(6) = β(2)β(3)");
    assert_rel(beta(10), b2 * b5, 1e-11, "β(10) = β(2)β(5)");
}

/// Both enumerations of H_a(z) — squarefree depth-first search and the
/// least-prime-factor sieve walk — agree at sizes beyond the unit tests.
#[test]
fn h_sum_routes_agree_at_scale() {
    for &a in &[1u64, 2] {
        let ctx = selberg::build_context(a, 100_000).unwrap();
        let sieved = selberg::h_sum_sieve_route(a, 100_000).unwrap();
        assert_rel(ctx.h_a, sieved, 1e-11, "H_a(10^5) routes");
    }
}

/// The sieve-side Mertens ratio ln z / H_1(z) climbs toward the analytic
/// density product as z grows, landing within 15% at z = 10^6.
#[test]
fn mertens_ratio_trends_toward_the_density_product() {
    let c = euler::sieve_density_product(&PrecisionBudget::default()).unwrap();
    let mut previous = f64::NEG_INFINITY;
    let mut final_deviation = f64::NAN;
    for &z in &[1_000u64, 31_623, 1_000_000] {
        let ctx = selberg::build_context(1, z).unwrap();
        let ratio = (z as f64).ln() / ctx.h_a;
        assert!(
            ratio > previous,
            "ratio must rise toward the product: {ratio} after {previous}"
        );
        assert!(ratio < c, "convergence is from below at z = {z}");
        previous = ratio;
        final_deviation = (ratio / c - 1.0).abs();
    }
    assert!(
        final_deviation <= 0.15,
        "final relative deviation {final_deviation} too large"
    );
}

/// The checkpointed summation engine against a from-scratch pass built on
/// the public segment API.
#[test]
fn phi_sum_matches_segment_walk() {
    let x = 100_000u64;
    let engine = sums::phi_sum(1, x, &[x]).unwrap();
    let seg = arith::build_segment(1, x + 2).unwrap();
    let direct: f64 = arith::primes_in(2, x + 1)
        .unwrap()
        .iter()
        .map(|&p| 1.0 / f64::from(seg.tau(p + 1)))
        .sum();
    assert_rel(engine[0].value, direct, 1e-12, "Φ_1(10^5) routes");
}
