//! Segmented sieve kernels and exact integer helpers.
//!
//! Everything downstream (weight tables, checkpointed sums, oracles in the
//! test suite) consumes the per-segment tables produced here:
//!
//! - `tau` — number-of-divisors values, filled by walking every divisor
//!   stride through the segment. Divisors larger than the segment length
//!   are enumerated by cofactor so no stride runs empty; the two loops
//!   together touch each (divisor, multiple) incidence exactly once.
//! - `mu`, `omega`, `lpf` — Möbius, distinct-prime-count and
//!   least-prime-factor tables from one marking pass with the primes up to
//!   `√hi`, plus a leftover pass for the at-most-one prime factor above
//!   `√hi`.
//!
//! Ranges are half-open `[lo, hi)` throughout. Segments are capped at
//! [`SEGMENT_LEN_CAP`] entries so a block stays cache- and memory-friendly;
//! absolute positions are capped at [`GLOBAL_LIMIT`] so every intermediate
//! product fits comfortably in 64 bits.

use crate::error::{Error, Result};

/// Largest admissible sieve position (exclusive bound on `hi`).
pub const GLOBAL_LIMIT: u64 = 1 << 40;

/// Largest admissible segment length for [`build_segment`], in entries.
pub const SEGMENT_LEN_CAP: u64 = 1 << 22;

fn check_range(lo: u64, hi: u64) -> Result<()> {
    if lo > hi {
        return Err(Error::domain(format!("inverted range [{lo}, {hi})")));
    }
    if hi > GLOBAL_LIMIT {
        return Err(Error::Cap {
            what: "sieve position",
            requested: hi,
            cap: GLOBAL_LIMIT,
        });
    }
    Ok(())
}

/// Plain sieve of Eratosthenes up to `n` inclusive.
pub(crate) fn simple_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Primality mask for `[lo, hi)`; `lo ≥ 1`. Entry `i` answers for `lo + i`.
pub(crate) fn prime_mask(lo: u64, hi: u64) -> Vec<bool> {
    debug_assert!(lo >= 1 && lo <= hi);
    let len = (hi - lo) as usize;
    let mut mask = vec![true; len];
    if lo == 1 && len > 0 {
        mask[0] = false;
    }
    if len == 0 {
        return mask;
    }
    let root = (hi - 1).isqrt();
    for p in simple_primes(root) {
        let mut m = (p * p).max(lo.div_ceil(p) * p);
        while m < hi {
            mask[(m - lo) as usize] = false;
            m += p;
        }
    }
    mask
}

/// Divisor-count table for `[lo, hi)`; `lo ≥ 1`. Entry `i` is `τ(lo + i)`.
pub(crate) fn tau_table(lo: u64, hi: u64) -> Vec<u32> {
    debug_assert!(lo >= 1 && lo < hi);
    let len = (hi - lo) as usize;
    let mut tau = vec![0u32; len];
    let b = hi - lo;

    // Divisors up to the segment length: walk each stride directly.
    for q in 1..=b.min(hi - 1) {
        let mut m = lo.div_ceil(q) * q;
        while m < hi {
            tau[(m - lo) as usize] += 1;
            m += q;
        }
    }

    // Divisors above the segment length hit at most a few entries each, so
    // enumerate them through the cofactor c = n / q instead.
    if b < hi - 1 {
        for c in 1..=(hi - 1) / (b + 1) {
            let qlo = (b + 1).max(lo.div_ceil(c));
            let qhi = (hi - 1) / c;
            if qlo > qhi {
                continue;
            }
            let mut idx = (c * qlo - lo) as usize;
            for _ in qlo..=qhi {
                tau[idx] += 1;
                idx += c as usize;
            }
        }
    }
    tau
}

/// Least-prime-factor table for `0..=n` via a linear sieve. In contrast to
/// [`SieveSegment::lpf`], primes store themselves here; `lpf[1] = 1`,
/// `lpf[0] = 0`.
pub(crate) fn lpf_table(n: usize) -> Vec<u32> {
    let mut lpf = vec![0u32; n + 1];
    if n >= 1 {
        lpf[1] = 1;
    }
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let ip = i * p as usize;
            if ip > n {
                break;
            }
            lpf[ip] = p;
            if p == lpf[i] {
                break;
            }
        }
    }
    lpf
}

/// One sieved block of multiplicative data over `[lo, hi)`.
///
/// Array entry `i` describes `n = lo + i`. The `lpf` array stores the least
/// prime factor of composites; primes are marked `0` (their least prime
/// factor, themselves, does not fit the narrow column for large `n`), and
/// the entry for `n = 1` stores the sentinel `1`. Use the accessors rather
/// than the raw arrays when in doubt.
#[derive(Clone, Debug)]
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    pub tau: Vec<u32>,
    pub mu: Vec<i8>,
    pub omega: Vec<u8>,
    pub lpf: Vec<u32>,
}

impl SieveSegment {
    #[inline]
    fn index(&self, n: u64) -> usize {
        assert!(
            n >= self.lo && n < self.hi,
            "{n} outside segment [{}, {})",
            self.lo,
            self.hi
        );
        (n - self.lo) as usize
    }

    /// Number of divisors τ(n).
    #[inline]
    pub fn tau(&self, n: u64) -> u32 {
        self.tau[self.index(n)]
    }

    /// Möbius μ(n) ∈ {-1, 0, 1}.
    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        self.mu[self.index(n)]
    }

    /// Number of distinct prime factors ω(n).
    #[inline]
    pub fn omega(&self, n: u64) -> u8 {
        self.omega[self.index(n)]
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.lpf[self.index(n)] == 0
    }

    /// Least prime factor; returns `n` itself for primes and `1` for `n = 1`.
    #[inline]
    pub fn least_prime_factor(&self, n: u64) -> u64 {
        let v = self.lpf[self.index(n)];
        if n >= 2 && v == 0 {
            n
        } else {
            v as u64
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// Sieve the full table set for `[lo, hi)`.
///
/// Errors if `lo = 0`, the range is inverted or empty, `hi` exceeds
/// [`GLOBAL_LIMIT`], or the segment is longer than [`SEGMENT_LEN_CAP`].
pub fn build_segment(lo: u64, hi: u64) -> Result<SieveSegment> {
    check_range(lo, hi)?;
    if lo < 1 || lo >= hi {
        return Err(Error::domain(format!(
            "build_segment needs 1 ≤ lo < hi, got [{lo}, {hi})"
        )));
    }
    if hi - lo > SEGMENT_LEN_CAP {
        return Err(Error::Cap {
            what: "segment length",
            requested: hi - lo,
            cap: SEGMENT_LEN_CAP,
        });
    }

    let len = (hi - lo) as usize;
    let tau = tau_table(lo, hi);
    let mut mu = vec![1i8; len];
    let mut omega = vec![0u8; len];
    let mut lpf = vec![0u32; len];
    let mut rem: Vec<u64> = (lo..hi).collect();

    for p in simple_primes((hi - 1).isqrt()) {
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            let idx = (m - lo) as usize;
            let mut e = 0u32;
            while rem[idx].is_multiple_of(p) {
                rem[idx] /= p;
                e += 1;
            }
            omega[idx] += 1;
            if lpf[idx] == 0 {
                lpf[idx] = p as u32;
            }
            mu[idx] = if e >= 2 { 0 } else { -mu[idx] };
            m += p;
        }
    }

    for idx in 0..len {
        let n = lo + idx as u64;
        if n == 1 {
            lpf[idx] = 1;
            continue;
        }
        // At most one prime factor above √hi can remain.
        if rem[idx] > 1 {
            omega[idx] += 1;
            mu[idx] = -mu[idx];
        }
        // A prime below √hi marks itself; reset to the 0-means-prime code.
        if lpf[idx] as u64 == n {
            lpf[idx] = 0;
        }
    }

    Ok(SieveSegment {
        lo,
        hi,
        tau,
        mu,
        omega,
        lpf,
    })
}

/// All primes in `[lo, hi)`, ascending. Works on ranges of any length by
/// sieving [`SEGMENT_LEN_CAP`]-sized blocks internally.
pub fn primes_in(lo: u64, hi: u64) -> Result<Vec<u64>> {
    check_range(lo, hi)?;
    let lo = lo.max(1);
    let mut out = Vec::new();
    let mut blo = lo;
    while blo < hi {
        let bhi = hi.min(blo + SEGMENT_LEN_CAP);
        let mask = prime_mask(blo, bhi);
        for (i, &is_p) in mask.iter().enumerate() {
            let n = blo + i as u64;
            if is_p && n >= 2 {
                out.push(n);
            }
        }
        blo = bhi;
    }
    Ok(out)
}

/// Exact prime factorisation, exponents included, primes ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Number of divisors τ(n) = Π (e + 1).
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| (e + 1) as u64).product()
    }

    /// Möbius function value.
    pub fn mu(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e >= 2) {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Euler totient φ(n).
    pub fn phi(&self) -> u64 {
        let mut v = self.n;
        for &(p, _) in &self.factors {
            v = v / p * (p - 1);
        }
        v
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Factor `n` by trial division (wheel over 2, 3, 6k±1); exact for the full
/// supported range `1 ≤ n ≤` [`GLOBAL_LIMIT`].
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("factorize(0) is undefined"));
    }
    if n > GLOBAL_LIMIT {
        return Err(Error::Cap {
            what: "factorize argument",
            requested: n,
            cap: GLOBAL_LIMIT,
        });
    }
    let mut m = n;
    let mut factors = Vec::new();
    let push = |factors: &mut Vec<(u64, u32)>, m: &mut u64, p: u64| {
        if (*m).is_multiple_of(p) {
            let mut e = 0;
            while (*m).is_multiple_of(p) {
                *m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    };
    push(&mut factors, &mut m, 2);
    push(&mut factors, &mut m, 3);
    let mut f = 5;
    while f * f <= m {
        push(&mut factors, &mut m, f);
        push(&mut factors, &mut m, f + 2);
        f += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}

/// Euler totient φ(n), `n ≥ 1`.
pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.phi())
}

/// All divisors of a squarefree number, ascending (2^ω of them).
/// Errors when the factorisation has a repeated prime.
pub fn squarefree_divisors(f: &Factorization) -> Result<Vec<u64>> {
    if !f.is_squarefree() {
        return Err(Error::domain(format!("{} is not squarefree", f.n)));
    }
    let mut divs = vec![1u64];
    for &(p, _) in &f.factors {
        for i in 0..divs.len() {
            divs.push(divs[i] * p);
        }
    }
    divs.sort_unstable();
    Ok(divs)
}
