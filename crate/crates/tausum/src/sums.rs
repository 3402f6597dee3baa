//! Large-range divisor summations.
//!
//! This module evaluates the partial sums the rest of the crate reasons
//! about: reciprocal divisor sums over all integers, over primes with a
//! shifted argument, over twin-prime patterns, and over restricted residue
//! or coprimality classes.  Every sum is swept left to right in fixed-length
//! segments (the same block size the base sieves use), each segment is
//! accumulated with compensated addition, and the per-segment partials are
//! folded in ascending segment order.  Worker threads only ever compute
//! whole segments, so the result is byte-for-byte identical no matter how
//! many threads participate; `wall_time_ms` is the only field that may vary
//! between repeat runs.
//!
//! Checkpoints let one pass report a whole column of partial sums: the
//! requested positions must be strictly ascending and end at `x`, and the
//! engine emits one [`Checkpoint`] row per position with the raw value, a
//! kind-specific normalization, and (for the prime reciprocal sum) the
//! analytic upper bound it is compared against.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::euler::{self, PrecisionBudget};
use crate::kahan::KahanSum;

/// Default ceiling for the summation limit `x`.  Large enough for every
/// verification target in this crate while keeping a full pass at the cap in
/// the minutes range on one core; raise it explicitly when more is wanted.
pub const DEFAULT_X_CAP: u64 = 1 << 33;

/// Hard ceiling on worker threads; beyond this the per-segment scheduling
/// overhead dominates on any plausible host.
pub const MAX_WORKERS: usize = 64;

/// Sweep block length, shared with the segmented sieves.
const SEGMENT_LEN: u64 = arith::SEGMENT_LEN_CAP;

/// Which family of terms a request sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SumKind {
    /// `Σ_{n ≤ x} 1/τ(n)`.
    TauRecip,
    /// `Σ_{p ≤ x} 1/τ(p + a)` over primes `p`, with shift `a ≥ 1`.
    Phi { a: u64 },
    /// `Σ_{p ≤ x} τ(p + a)` over primes `p`; `a ≥ 1` or `a = -1`.
    Titchmarsh { a: i64 },
    /// `Σ 1/τ(p + a)` over primes `p ≤ x` with `p + 2` also prime.
    Twin { a: u64 },
    /// `Σ_{n ≤ x, (n, d) = 1} 1/τ(n)` for squarefree `d`.
    CoprimeRestricted { d: u64 },
    /// `Σ_{n ≤ x, n ≡ residue (mod modulus)} 1/τ(n)`.
    Progression { modulus: u64, residue: u64 },
}

/// A summation job: the term family, the limit, and the positions at which
/// partial sums are reported.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumRequest {
    pub kind: SumKind,
    pub x: u64,
    /// Strictly ascending, final entry equal to `x`.
    pub checkpoints: Vec<u64>,
}

/// One reported row of a summation run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub x: u64,
    /// The partial sum up to and including `x`.
    pub value: f64,
    /// Kind-specific rescaling that tends to a constant as `x` grows; see
    /// [`normalized`] for the exact factor per kind.
    pub normalized: f64,
    /// The analytic ceiling `4 K(a) x / (ln x)^{3/2}`, present only for
    /// [`SumKind::Phi`] at `x ≥ 2`.
    pub bound: Option<f64>,
    /// Milliseconds elapsed since the start of the run.  Informational only:
    /// this is the one field exempt from reproducibility guarantees.
    pub wall_time_ms: u64,
}

impl SumRequest {
    /// A request reporting at every power of ten from `10^3` up to `x`.
    pub fn new(kind: SumKind, x: u64) -> SumRequest {
        SumRequest {
            kind,
            x,
            checkpoints: default_checkpoints(x),
        }
    }

    /// Check limits, checkpoint shape, and kind parameters against `x_cap`.
    pub fn validate(&self, x_cap: u64) -> Result<()> {
        if self.x < 1 {
            return Err(Error::domain("summation limit x must be at least 1"));
        }
        if self.x > x_cap {
            return Err(Error::Cap {
                what: "summation limit",
                requested: self.x,
                cap: x_cap,
            });
        }
        if self.checkpoints.is_empty() {
            return Err(Error::domain("at least one checkpoint is required"));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "checkpoints must be strictly ascending, got {:?}",
                self.checkpoints
            )));
        }
        let first = self.checkpoints[0];
        let last = *self.checkpoints.last().expect("nonempty");
        if first < 1 {
            return Err(Error::domain("checkpoints start at 1"));
        }
        if last != self.x {
            return Err(Error::domain(format!(
                "final checkpoint {last} must equal x = {}",
                self.x
            )));
        }
        // The shifted sieve must stay inside the global position cap.
        let headroom = |shift: u64| -> Result<()> {
            if self.x.saturating_add(shift) >= arith::GLOBAL_LIMIT {
                return Err(Error::Cap {
                    what: "shifted sieve position",
                    requested: self.x.saturating_add(shift),
                    cap: arith::GLOBAL_LIMIT,
                });
            }
            Ok(())
        };
        match self.kind {
            SumKind::TauRecip => Ok(()),
            SumKind::Phi { a } | SumKind::Twin { a } => {
                if a < 1 {
                    return Err(Error::domain("shift a must be at least 1"));
                }
                headroom(a.max(2))
            }
            SumKind::Titchmarsh { a } => {
                if a != -1 && a < 1 {
                    return Err(Error::domain(format!(
                        "shift a = {a} must be -1 or at least 1"
                    )));
                }
                headroom(a.max(0) as u64)
            }
            SumKind::CoprimeRestricted { d } => {
                if d < 1 {
                    return Err(Error::domain("coprimality modulus d must be at least 1"));
                }
                if !arith::factorize(d)?.is_squarefree() {
                    return Err(Error::domain(format!(
                        "coprimality modulus d = {d} must be squarefree"
                    )));
                }
                Ok(())
            }
            SumKind::Progression { modulus, residue } => {
                if modulus < 1 {
                    return Err(Error::domain("progression modulus must be at least 1"));
                }
                if residue >= modulus {
                    return Err(Error::domain(format!(
                        "residue {residue} outside 0..{modulus}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Powers of ten from `10^3` up to `x`, always ending with `x` itself.
pub fn default_checkpoints(x: u64) -> Vec<u64> {
    let mut cps = Vec::new();
    let mut t: u64 = 1_000;
    while t < x {
        cps.push(t);
        t = t.saturating_mul(10);
    }
    cps.push(x);
    cps
}

/// Run a summation request with `workers` threads, enforcing `x_cap`.
///
/// The checkpoint intervals are processed in order; within an interval the
/// segments are evaluated in parallel and merged in ascending segment order,
/// so every field except `wall_time_ms` is reproducible bit for bit across
/// worker counts.
pub fn run(req: &SumRequest, workers: usize, x_cap: u64) -> Result<Vec<Checkpoint>> {
    req.validate(x_cap)?;
    if !(1..=MAX_WORKERS).contains(&workers) {
        return Err(Error::domain(format!(
            "workers = {workers} outside 1..={MAX_WORKERS}"
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start {workers}-thread pool: {e}")))?;

    // For the prime reciprocal sum the report carries its analytic ceiling.
    let bound_scale = match req.kind {
        SumKind::Phi { a } => {
            let report = euler::constants(a, &PrecisionBudget::default())?;
            Some(4.0 * report.k_a)
        }
        _ => None,
    };

    let clock = Instant::now();
    let mut total = KahanSum::new();
    let mut next = domain_start(req.kind);
    let mut out = Vec::with_capacity(req.checkpoints.len());
    for &cp in &req.checkpoints {
        let hi = cp + 1;
        if hi > next {
            let parts: Vec<KahanSum> = pool.install(|| {
                segment_ranges(next, hi)
                    .par_iter()
                    .map(|&(lo, hi)| segment_sum(req.kind, lo, hi))
                    .collect()
            });
            for part in parts {
                total.merge(part);
            }
            next = hi;
        }
        let value = total.value();
        out.push(Checkpoint {
            x: cp,
            value,
            normalized: normalized(req.kind, cp, value),
            bound: bound_scale.and_then(|scale| phi_bound(scale, cp)),
            wall_time_ms: clock.elapsed().as_millis() as u64,
        });
    }
    Ok(out)
}

/// `Σ_{n ≤ x} 1/τ(n)` reported at `checkpoints` (default decades if empty).
pub fn tau_recip_sum(x: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    single(SumKind::TauRecip, x, checkpoints)
}

/// `Σ_{p ≤ x} 1/τ(p + a)` reported at `checkpoints` (default decades if empty).
pub fn phi_sum(a: u64, x: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    single(SumKind::Phi { a }, x, checkpoints)
}

/// `Σ_{p ≤ x} τ(p + a)` reported at `checkpoints` (default decades if empty).
pub fn titchmarsh_sum(a: i64, x: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    single(SumKind::Titchmarsh { a }, x, checkpoints)
}

/// `Σ 1/τ(p + a)` over twin-prime leaders `p ≤ x`, reported at `checkpoints`.
pub fn twin_phi_sum(a: u64, x: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    single(SumKind::Twin { a }, x, checkpoints)
}

/// `Σ_{n ≤ x, (n, d) = 1} 1/τ(n)` for squarefree `d`, at `checkpoints`.
pub fn coprime_restricted_sum(x: u64, d: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    single(SumKind::CoprimeRestricted { d }, x, checkpoints)
}

/// `Σ_{n ≤ x, n ≡ r (mod d)} 1/τ(n)` reported at `checkpoints`.
pub fn progression_sum(x: u64, d: u64, r: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    single(
        SumKind::Progression {
            modulus: d,
            residue: r,
        },
        x,
        checkpoints,
    )
}

fn single(kind: SumKind, x: u64, checkpoints: &[u64]) -> Result<Vec<Checkpoint>> {
    let checkpoints = if checkpoints.is_empty() {
        default_checkpoints(x)
    } else {
        checkpoints.to_vec()
    };
    run(
        &SumRequest {
            kind,
            x,
            checkpoints,
        },
        1,
        DEFAULT_X_CAP,
    )
}

/// First summand position: 1 for integer sums, 2 for sums over primes.
fn domain_start(kind: SumKind) -> u64 {
    match kind {
        SumKind::TauRecip | SumKind::CoprimeRestricted { .. } | SumKind::Progression { .. } => 1,
        SumKind::Phi { .. } | SumKind::Titchmarsh { .. } | SumKind::Twin { .. } => 2,
    }
}

/// Split `[lo, hi)` into consecutive blocks of at most [`SEGMENT_LEN`].
fn segment_ranges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut ranges = Vec::new();
    let mut start = lo;
    while start < hi {
        let end = hi.min(start + SEGMENT_LEN);
        ranges.push((start, end));
        start = end;
    }
    ranges
}

/// Rescale a partial sum so the column tends to a constant: the reciprocal
/// sums carry `√(ln x)/x`, the prime reciprocal sum `(ln x)^{3/2}/x`, the
/// twin variant `(ln x)^{5/2}/x`, and the plain shifted divisor sum `1/x`.
fn normalized(kind: SumKind, x: u64, value: f64) -> f64 {
    let lx = (x as f64).ln();
    match kind {
        SumKind::TauRecip | SumKind::CoprimeRestricted { .. } | SumKind::Progression { .. } => {
            value * lx.sqrt() / x as f64
        }
        SumKind::Phi { .. } => value * lx.powf(1.5) / x as f64,
        SumKind::Titchmarsh { .. } => value / x as f64,
        SumKind::Twin { .. } => value * lx.powf(2.5) / x as f64,
    }
}

fn phi_bound(scale: f64, x: u64) -> Option<f64> {
    if x < 2 {
        return None;
    }
    let lx = (x as f64).ln();
    Some(scale * x as f64 / lx.powf(1.5))
}

/// Accumulate one segment `[lo, hi)`; infallible because [`run`] has already
/// validated every position against the global caps.
fn segment_sum(kind: SumKind, lo: u64, hi: u64) -> KahanSum {
    match kind {
        SumKind::TauRecip => tau_recip_segment(lo, hi),
        SumKind::CoprimeRestricted { d } => coprime_segment(lo, hi, d),
        SumKind::Progression { modulus, residue } => {
            progression_segment(lo, hi, modulus, residue)
        }
        SumKind::Phi { a } => prime_segment(lo, hi, a as i64, PrimeWeight::ReciprocalTau),
        SumKind::Titchmarsh { a } => prime_segment(lo, hi, a, PrimeWeight::Tau),
        SumKind::Twin { a } => twin_segment(lo, hi, a),
    }
}

fn tau_recip_segment(lo: u64, hi: u64) -> KahanSum {
    let tau = arith::tau_table(lo, hi);
    let mut sum = KahanSum::new();
    for &t in &tau {
        sum.add(1.0 / f64::from(t));
    }
    sum
}

fn coprime_segment(lo: u64, hi: u64, d: u64) -> KahanSum {
    let tau = arith::tau_table(lo, hi);
    let mut keep = vec![true; (hi - lo) as usize];
    let fac = arith::factorize(d).expect("validated modulus");
    for &(p, _) in &fac.factors {
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            keep[(m - lo) as usize] = false;
            m += p;
        }
    }
    let mut sum = KahanSum::new();
    for (i, &t) in tau.iter().enumerate() {
        if keep[i] {
            sum.add(1.0 / f64::from(t));
        }
    }
    sum
}

fn progression_segment(lo: u64, hi: u64, modulus: u64, residue: u64) -> KahanSum {
    let tau = arith::tau_table(lo, hi);
    let mut sum = KahanSum::new();
    let mut n = lo + (residue + modulus - lo % modulus) % modulus;
    while n < hi {
        sum.add(1.0 / f64::from(tau[(n - lo) as usize]));
        n += modulus;
    }
    sum
}

#[derive(Clone, Copy)]
enum PrimeWeight {
    ReciprocalTau,
    Tau,
}

/// Sum a τ-weight of `p + a` over primes `p` in `[lo, hi)`.  The divisor
/// table is sieved once over the shifted window `[lo + a, hi + a)`, which
/// lines up index-for-index with the primality mask of `[lo, hi)`.
fn prime_segment(lo: u64, hi: u64, a: i64, weight: PrimeWeight) -> KahanSum {
    debug_assert!(lo >= 2, "prime domains start at 2");
    let mask = arith::prime_mask(lo, hi);
    let shift_lo = (lo as i64 + a) as u64;
    let shift_hi = (hi as i64 + a) as u64;
    let tau = arith::tau_table(shift_lo, shift_hi);
    let mut sum = KahanSum::new();
    for (i, &is_prime) in mask.iter().enumerate() {
        if is_prime {
            let t = f64::from(tau[i]);
            sum.add(match weight {
                PrimeWeight::ReciprocalTau => 1.0 / t,
                PrimeWeight::Tau => t,
            });
        }
    }
    sum
}

/// Sum `1/τ(p + a)` over primes `p` in `[lo, hi)` with `p + 2` also prime.
/// The primality mask extends two places past the segment so pairs that
/// straddle the boundary are still seen.
fn twin_segment(lo: u64, hi: u64, a: u64) -> KahanSum {
    debug_assert!(lo >= 2, "prime domains start at 2");
    let mask = arith::prime_mask(lo, hi + 2);
    let tau = arith::tau_table(lo + a, hi + a);
    let mut sum = KahanSum::new();
    for i in 0..(hi - lo) as usize {
        if mask[i] && mask[i + 2] {
            sum.add(1.0 / f64::from(tau[i]));
        }
    }
    sum
}
