//! Real-axis zeta machinery, tail-accelerated Euler products, and the
//! derivative stack of the local factors attached to restricted 1/τ sums.
//!
//! # Evaluation strategy
//!
//! Infinite products over primes converge far too slowly to evaluate term
//! by term, so [`euler_product`] splits every product at a cutoff P₀:
//! factors at primes `p ≤ P₀` are evaluated exactly, while the tail is
//! reconstructed from the expansion `ln f(p) = Σ_{k≥2} e_k p^{-ks}` and
//! prime-zeta values restricted to `p > P₀`. A nonzero `p^0` or `p^{-s}`
//! log-coefficient means the product diverges and is rejected. With the
//! default budget the tail truncation sits far below 10⁻¹³, and results are
//! certified by recomputing at twice the cutoff.
//!
//! Supporting evaluators:
//!
//! - [`zeta_real`] — Euler–Maclaurin ζ(s) on `[0.6, 64]`, `s ≠ 1`;
//! - [`zeta_times_s_minus_1`] — ζ(s)(s-1) through the pole at `s = 1`,
//!   via the alternating zeta series (Chebyshev-accelerated), so the one
//!   singularity on our path never appears;
//! - [`prime_zeta`] — `P(s) = Σ_n μ(n)/n · ln ζ(ns)`.
//!
//! # The derivative stack
//!
//! For squarefree `d`, `J_d(s) = Π_{p|d} (p^s ln(p^s/(p^s-1)))^{-1}` has
//! logarithmic derivative `I_d(s) = Σ_{p|d} f(s;p)`, and every
//! `f^{(m)}(1;p)` is an explicit series in the cumulative reciprocal-log
//! coefficients `d_k` (see [`crate::gregory`]):
//!
//! ```text
//! f^{(m)}(1;p) = (-1)^m (ln p)^{m+1} ( 1/(2p) + Σ_{k≥2} d_k k^m p^{-k} )
//! ```
//!
//! so `J` derivatives come from an exact Leibniz recursion, with no
//! numerical differentiation. The analytic envelope `H(s)` (a square-root
//! regularised product with the ζ(s)(s-1) completion) has no such closed
//! ladder and is differentiated by central differences plus Richardson
//! extrapolation instead — a deliberate split: exact where exactness is
//! available, stencils only where it is not.

use crate::arith;
use crate::error::{Error, Result};
use crate::gregory::{self, GregorySeries};
use crate::kahan::KahanSum;
use crate::pseries::Ps;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Controls cutoff/order/certification for product evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecisionBudget {
    /// Primes up to this bound enter products exactly (≥ 100).
    pub prime_cutoff: u64,
    /// Truncation order of the tail log-series (4..=24).
    pub series_order: usize,
    /// Digits that must survive doubling the cutoff (1..=13).
    pub target_digits: u32,
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        PrecisionBudget {
            prime_cutoff: 10_000,
            series_order: 12,
            target_digits: 12,
        }
    }
}

impl PrecisionBudget {
    fn validate(&self) -> Result<()> {
        if self.prime_cutoff < 100 || self.prime_cutoff > 100_000_000 {
            return Err(Error::domain(format!(
                "prime_cutoff {} outside 100..=10^8",
                self.prime_cutoff
            )));
        }
        if !(4..=24).contains(&self.series_order) {
            return Err(Error::domain(format!(
                "series_order {} outside 4..=24",
                self.series_order
            )));
        }
        if !(1..=13).contains(&self.target_digits) {
            return Err(Error::domain(format!(
                "target_digits {} outside 1..=13",
                self.target_digits
            )));
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        PrecisionBudget {
            prime_cutoff: self.prime_cutoff * 2,
            ..*self
        }
    }
}

/// Bernoulli numbers B₂, B₄, …, B₂₄.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// ζ(s) for real `s ∈ [0.6, 64]`, `|s-1| ≥ 10⁻⁶`, by Euler–Maclaurin with
/// 64 direct terms and twelve correction terms (absolute error ≪ 10⁻¹³).
pub fn zeta_real(s: f64) -> Result<f64> {
    if !(0.6..=64.0).contains(&s) {
        return Err(Error::domain(format!("zeta_real domain is [0.6, 64], got {s}")));
    }
    if (s - 1.0).abs() < 1e-6 {
        return Err(Error::domain("zeta_real undefined this close to the pole at s = 1"));
    }
    const N: usize = 64;
    let nf = N as f64;
    let mut acc = KahanSum::new();
    for n in 1..N {
        acc.add((n as f64).powf(-s));
    }
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * nf.powf(-s));
    // B_{2j}/(2j)! · s(s+1)…(s+2j-2) · N^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0f64; // (2j)! for j = 1
    let mut npow = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        acc.add(b / fact * rising * npow);
        let two_j = 2.0 * (j + 1) as f64;
        rising *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
        npow /= nf * nf;
    }
    Ok(acc.value())
}

/// Alternating zeta η(s) = Σ (-1)^{k-1} k^{-s} by Chebyshev-weighted
/// acceleration (50 terms; error far below f64 resolution for s ≥ 0.5).
fn eta_alternating(s: f64) -> f64 {
    const N: usize = 50;
    let nf = N as f64;
    let mut t = 1.0 / nf;
    let mut cum = t;
    let mut d = [0.0f64; N + 1];
    d[0] = nf * cum;
    for (i, slot) in d.iter_mut().enumerate().skip(1) {
        let fi = i as f64;
        t *= 4.0 * (nf + fi - 1.0) * (nf - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        cum += t;
        *slot = nf * cum;
    }
    let dn = d[N];
    let mut acc = KahanSum::new();
    let mut sign = 1.0;
    for (k, dk) in d.iter().enumerate().take(N) {
        acc.add(sign * (dk - dn) * ((k + 1) as f64).powf(-s));
        sign = -sign;
    }
    -acc.value() / dn
}

/// ζ(s)(s-1) for `s ∈ [0.6, 2]`, analytic through `s = 1` where it
/// equals 1. Uses η(s)·(s-1)/(1-2^{1-s}) with the removable factor
/// evaluated through `expm1`, so nothing blows up near the pole.
pub fn zeta_times_s_minus_1(s: f64) -> Result<f64> {
    if !(0.6..=2.0).contains(&s) {
        return Err(Error::domain(format!(
            "zeta_times_s_minus_1 domain is [0.6, 2], got {s}"
        )));
    }
    let u = (1.0 - s) * LN_2;
    // (s-1)/(1-2^{1-s}) = u/(ln2 · expm1(u)), limit 1/ln2 at u = 0.
    let factor = if u == 0.0 {
        1.0 / LN_2
    } else {
        u / (LN_2 * u.exp_m1())
    };
    Ok(eta_alternating(s) * factor)
}

/// Prime zeta `P(s) = Σ_p p^{-s}` for `s ∈ (1, 64]` via Möbius inversion
/// of `ln ζ`; terms with `ns > 64` are below 2⁻⁶⁴ and dropped.
pub fn prime_zeta(s: f64) -> Result<f64> {
    if !(1.0..=64.0).contains(&s) || (s - 1.0) < 1e-6 {
        return Err(Error::domain(format!(
            "prime_zeta domain is (1, 64], got {s}"
        )));
    }
    let mut acc = KahanSum::new();
    let mut n = 1u64;
    loop {
        let ns = n as f64 * s;
        if ns > 64.0 {
            break;
        }
        let mu = arith::factorize(n)?.mu();
        if mu != 0 {
            let z = zeta_real(ns)?;
            acc.add(f64::from(mu) * (z - 1.0).ln_1p() / n as f64);
        }
        n += 1;
    }
    Ok(acc.value())
}

/// Evaluate `Π_p f(p)` (product over all primes).
///
/// `ln_term(p)` must return `ln f(p)` exactly; `log_tail[k]` is the
/// coefficient of `p^{-ks}` in `ln f(p)`, used to reconstruct the product
/// over `p >` the budget cutoff. Entries `k = 0, 1` must be zero — a
/// nonzero one means the product diverges.
pub fn euler_product<F: Fn(u64) -> f64>(
    ln_term: F,
    log_tail: &[f64],
    s: f64,
    budget: &PrecisionBudget,
) -> Result<f64> {
    budget.validate()?;
    if !(0.6..=2.0).contains(&s) {
        return Err(Error::domain(format!(
            "euler_product exponent scale must lie in [0.6, 2], got {s}"
        )));
    }
    for (k, &e) in log_tail.iter().enumerate().take(2) {
        if e != 0.0 {
            return Err(Error::domain(format!(
                "divergent local factor: nonzero log coefficient at p^(-{k}s)"
            )));
        }
    }
    let primes = arith::primes_in(2, budget.prime_cutoff + 1)?;
    let mut acc = KahanSum::new();
    for &p in &primes {
        acc.add(ln_term(p));
    }
    for (k, &e) in log_tail.iter().enumerate().skip(2) {
        if e == 0.0 {
            continue;
        }
        let ks = k as f64 * s;
        if ks > 60.0 {
            break; // below 10⁻¹⁸ already for p > 100
        }
        let mut head = KahanSum::new();
        for &p in &primes {
            head.add((p as f64).powf(-ks));
        }
        acc.add(e * (prime_zeta(ks)? - head.value()));
    }
    Ok(acc.value().exp())
}

/// Sieve densities `g(p) = 1/(p(p-1) ln(p/(p-1)))` and `h = g/(1-g)`.
/// Errors unless `p` is prime.
pub fn g_h_values(p: u64) -> Result<(f64, f64)> {
    let f = arith::factorize(p)?;
    if f.factors.len() != 1 || f.factors[0].1 != 1 {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let pf = p as f64;
    let l = -(-1.0 / pf).ln_1p(); // ln(p/(p-1))
    let g = 1.0 / (pf * (pf - 1.0) * l);
    Ok((g, g / (1.0 - g)))
}

/// `J_d(s) = Π_{p|d} (p^s ln(p^s/(p^s-1)))^{-1}` for squarefree `d`;
/// `J_1 ≡ 1`. Domain `s ∈ [0.9, 2]`.
pub fn j_eval(d: u64, s: f64) -> Result<f64> {
    if !(0.9..=2.0).contains(&s) {
        return Err(Error::domain(format!("j_eval domain is [0.9, 2], got s = {s}")));
    }
    let f = arith::factorize(d)?;
    if !f.is_squarefree() {
        return Err(Error::domain(format!("{d} is not squarefree")));
    }
    let mut prod = 1.0;
    for &(p, _) in &f.factors {
        let u = (p as f64).powf(-s);
        prod *= u / (-(-u).ln_1p());
    }
    Ok(prod)
}

fn cumulative_coeffs() -> &'static GregorySeries {
    static GREG: OnceLock<GregorySeries> = OnceLock::new();
    GREG.get_or_init(|| {
        gregory::gregory_coefficients(160).expect("static series length is within the cap")
    })
}

/// `f^{(m)}(1;p)` for the per-prime function
/// `f(s;p) = ln p / ((p^s-1) ln(p^s/(p^s-1))) - ln p`, `m ≤ 8`.
pub fn f_derivative(p: u64, m: usize) -> Result<f64> {
    if m > 8 {
        return Err(Error::domain(format!("derivative order {m} > 8")));
    }
    if p < 2 {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let dk = &cumulative_coeffs().d;
    let pf = p as f64;
    let lp = pf.ln();
    let mut acc = KahanSum::new();
    acc.add(0.5 / pf); // k = 1: d_1 = 1/2
    let mut pk = 1.0 / (pf * pf);
    for (k, &dkv) in dk.iter().enumerate().skip(2) {
        let term = dkv * (k as f64).powi(m as i32) * pk;
        acc.add(term);
        if term.abs() < 1e-20 {
            break;
        }
        pk /= pf;
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * lp.powi(m as i32 + 1) * acc.value())
}

/// `I_d^{(m)}(1) = Σ_{p|d} f^{(m)}(1;p)` for `m = 0..=m_max ≤ 8`;
/// `d` squarefree (all zeros for `d = 1`).
pub fn i_derivatives(d: u64, m_max: usize) -> Result<Vec<f64>> {
    if m_max > 8 {
        return Err(Error::domain(format!("derivative order {m_max} > 8")));
    }
    let f = arith::factorize(d)?;
    if !f.is_squarefree() {
        return Err(Error::domain(format!("{d} is not squarefree")));
    }
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut acc = KahanSum::new();
        for &(p, _) in &f.factors {
            acc.add(f_derivative(p, m)?);
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// `J_d^{(l)}(1)` for `l = 0..=l_max ≤ 8` by the exact Leibniz recursion
/// `J^{(r+1)} = Σ_j C(r,j) J^{(j)} I^{(r-j)}` seeded with [`j_eval`].
pub fn j_derivatives(d: u64, l_max: usize) -> Result<Vec<f64>> {
    if l_max > 8 {
        return Err(Error::domain(format!("derivative order {l_max} > 8")));
    }
    let i = i_derivatives(d, l_max.saturating_sub(1))?;
    let mut j = vec![0.0; l_max + 1];
    j[0] = j_eval(d, 1.0)?;
    for r in 0..l_max {
        let mut acc = KahanSum::new();
        let mut binom = 1.0;
        for (jj, jv) in j.iter().enumerate().take(r + 1) {
            acc.add(binom * jv * i[r - jj]);
            binom = binom * (r - jj) as f64 / (jj + 1) as f64;
        }
        j[r + 1] = acc.value();
    }
    Ok(j)
}

/// The analytic envelope
/// `H(s) = (1/s) √(ζ(s)(s-1)) Π_p √(p^{2s}-p^s) · ln(p^s/(p^s-1))`,
/// smooth through `s = 1`. Domain `[0.9, 1.1]` (all the stencils below
/// stay well inside).
pub fn h_eval(s: f64, budget: &PrecisionBudget) -> Result<f64> {
    if !(0.9..=1.1).contains(&s) {
        return Err(Error::domain(format!("h_eval domain is [0.9, 1.1], got {s}")));
    }
    let order = budget.series_order;
    // Each product factor normalises to √(1-u)·L(u)/u with u = p^{-s}.
    let local = Ps::one_minus_t_pow(0.5, order).mul(&Ps::log_over_t(order));
    let tail = local.ln();
    let prod = euler_product(
        |p| {
            let u = (p as f64).powf(-s);
            let l = -(-u).ln_1p();
            0.5 * (-u).ln_1p() + (l / u).ln()
        },
        &tail.a,
        s,
        budget,
    )?;
    Ok(zeta_times_s_minus_1(s)?.sqrt() * prod / s)
}

/// Central-difference stencil of order `k` with spacing `h`.
fn stencil<F: Fn(f64) -> Result<f64>>(f: &F, k: usize, h: f64) -> Result<f64> {
    Ok(match k {
        1 => (f(1.0 + h)? - f(1.0 - h)?) / (2.0 * h),
        2 => (f(1.0 + h)? - 2.0 * f(1.0)? + f(1.0 - h)?) / (h * h),
        3 => {
            (f(1.0 + 2.0 * h)? - 2.0 * f(1.0 + h)? + 2.0 * f(1.0 - h)? - f(1.0 - 2.0 * h)?)
                / (2.0 * h * h * h)
        }
        4 => {
            (f(1.0 + 2.0 * h)? - 4.0 * f(1.0 + h)? + 6.0 * f(1.0)? - 4.0 * f(1.0 - h)?
                + f(1.0 - 2.0 * h)?)
                / (h * h * h * h)
        }
        _ => return Err(Error::domain(format!("stencil order {k} unsupported"))),
    })
}

/// k-th derivative at 1 by central differences with two Richardson levels.
/// The base step grows with the order (the h^k division amplifies the
/// ~10⁻¹⁴ evaluation noise, so higher orders need coarser stencils).
fn central_derivative<F: Fn(f64) -> Result<f64>>(f: &F, k: usize) -> Result<f64> {
    let h0 = match k {
        1 | 2 => 1e-3,
        3 => 4e-3,
        _ => 8e-3,
    };
    let d1 = stencil(f, k, h0)?;
    let d2 = stencil(f, k, h0 / 2.0)?;
    let d3 = stencil(f, k, h0 / 4.0)?;
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

/// `H^{(k)}(1)` for `k = 0..=k_max ≤ 4`.
pub fn h_derivatives(k_max: usize, budget: &PrecisionBudget) -> Result<Vec<f64>> {
    if k_max > 4 {
        return Err(Error::domain(format!("derivative order {k_max} > 4")));
    }
    let f = |s: f64| h_eval(s, budget);
    let mut out = vec![f(1.0)?];
    for k in 1..=k_max {
        out.push(central_derivative(&f, k)?);
    }
    Ok(out)
}

/// The full derivative bundle at `s = 1` for one squarefree modulus.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticDerivatives {
    pub d: u64,
    pub order_max: usize,
    /// `J_d^{(l)}(1)`, exact recursion.
    pub j: Vec<f64>,
    /// `I_d^{(m)}(1)`, exact series.
    pub i: Vec<f64>,
    /// `H^{(k)}(1)`, Richardson stencils.
    pub h: Vec<f64>,
    /// `G_d = H·J_d` assembled by the Leibniz rule.
    pub g: Vec<f64>,
}

/// Derivatives of `G_d = H · J_d` at 1 up to `k_max ≤ 4`.
pub fn g_derivatives(d: u64, k_max: usize, budget: &PrecisionBudget) -> Result<AnalyticDerivatives> {
    if k_max > 4 {
        return Err(Error::domain(format!("derivative order {k_max} > 4")));
    }
    let j = j_derivatives(d, k_max)?;
    let i = i_derivatives(d, k_max)?;
    let h = h_derivatives(k_max, budget)?;
    let mut g = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut acc = KahanSum::new();
        let mut binom = 1.0;
        for l in 0..=k {
            acc.add(binom * h[k - l] * j[l]);
            binom = binom * (k - l) as f64 / (l + 1) as f64;
        }
        g.push(acc.value());
    }
    Ok(AnalyticDerivatives {
        d,
        order_max: k_max,
        j,
        i,
        h,
        g,
    })
}

/// Expansion main term for `Σ_{n≤x, (n,d)=1} 1/τ(n)`:
///
/// ```text
/// x/√(π ln x) · Σ_{k=0..m} (-1)^k C(2k,k) 4^{-k} G_d^{(k)}(1) / (ln x)^k
/// ```
///
/// `x ≥ 16`, `d` squarefree, `m ≤ 4`.
pub fn mainterm(x: f64, d: u64, m: usize, budget: &PrecisionBudget) -> Result<f64> {
    if !x.is_finite() || x < 16.0 {
        return Err(Error::domain(format!("mainterm needs x ≥ 16, got {x}")));
    }
    if m > 4 {
        return Err(Error::domain(format!("expansion order {m} > 4")));
    }
    let g = g_derivatives(d, m, budget)?;
    let lx = x.ln();
    let mut acc = KahanSum::new();
    let mut a_k = 1.0; // (-1)^k C(2k,k)/4^k
    for k in 0..=m {
        acc.add(a_k * g.g[k] / lx.powi(k as i32));
        a_k *= -((2 * k + 1) as f64) / ((2 * k + 2) as f64);
    }
    Ok(x / (PI * lx).sqrt() * acc.value())
}

/// Remainder scale `κ(d) = (ω(d) + 2)^10` used to normalise residuals of
/// the expansion above.
pub fn kappa(d: u64) -> Result<f64> {
    let f = arith::factorize(d)?;
    Ok(((f.omega() + 2) as f64).powi(10))
}

/// `C = Π_p (1-g(p))(1-1/p)^{-1}` where `g(p) = 1/(p(p-1)ln(p/(p-1)))`
/// is the sieve density. This is the limit of `ln z / H₁(z)` as `z → ∞`,
/// and enters the alternative route `K = H(1)·C/√π`.
pub fn sieve_density_product(budget: &PrecisionBudget) -> Result<f64> {
    let order = budget.series_order;
    // g's expansion in t = 1/p comes from the reciprocal-log series:
    // g = t²/((1-t)(-ln(1-t))) = t·(Σ c_k t^k)/(1-t).
    let c_series = Ps::from_coeffs(cumulative_coeffs().c[..=order].to_vec());
    let g_series = c_series.mul(&Ps::geometric(order)).shift_up();
    let f_c = Ps::one(order).sub(&g_series).mul(&Ps::geometric(order));
    euler_product(
        |p| {
            let (g, _) = g_h_values(p).expect("prime from the sieve");
            (-g).ln_1p() - (-1.0 / p as f64).ln_1p()
        },
        &f_c.ln().a,
        1.0,
        budget,
    )
}

/// The constants bundle; `k` is reported from the direct product route and
/// `k_route_delta` records its distance to the `H(1)·C/√π` route.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub a: u64,
    pub k: f64,
    pub beta_a: f64,
    pub k_a: f64,
    pub a0: f64,
    pub c_titchmarsh: f64,
    pub k_route_delta: f64,
    pub budget: PrecisionBudget,
}

struct ConstantsValues {
    k_direct: f64,
    k_alt: f64,
    a0: f64,
    c_titchmarsh: f64,
    beta_a: f64,
}

fn constants_at(a: u64, budget: &PrecisionBudget) -> Result<ConstantsValues> {
    let order = budget.series_order;
    let log_over_t = Ps::log_over_t(order);
    let geom_shift = Ps::geometric(order).shift_up(); // t/(1-t)

    // Direct product: (1/√π) Π √(p/(p-1)) (p ln(p/(p-1)) - 1/(p-1)).
    let f_k = Ps::one_minus_t_pow(-0.5, order).mul(&log_over_t.sub(&geom_shift));
    let k_direct = euler_product(
        |p| {
            let pf = p as f64;
            let l = -(-1.0 / pf).ln_1p();
            0.5 * (pf / (pf - 1.0)).ln() + (pf * l - 1.0 / (pf - 1.0)).ln()
        },
        &f_k.ln().a,
        1.0,
        budget,
    )? / PI.sqrt();

    // a₀ = (1/√π) Π √(p²-p) ln(p/(p-1)); the factor normalises to
    // √(1-t)·L(t)/t, the same shape as the H(s) local factor.
    let f_a0 = Ps::one_minus_t_pow(0.5, order).mul(&log_over_t);
    let a0 = euler_product(
        |p| {
            let pf = p as f64;
            let l = -(-1.0 / pf).ln_1p();
            0.5 * (pf * (pf - 1.0)).ln() + l.ln()
        },
        &f_a0.ln().a,
        1.0,
        budget,
    )? / PI.sqrt();

    let k_alt = h_eval(1.0, budget)? * sieve_density_product(budget)? / PI.sqrt();

    let c_titchmarsh = zeta_real(2.0)? * zeta_real(3.0)? / zeta_real(6.0)?;

    // β(a) = Π_{p|a} (1 + 1/(p(p-1)ln(p/(p-1)) - 1)), a finite product.
    let mut beta_a = 1.0;
    for &(p, _) in &arith::factorize(a)?.factors {
        let pf = p as f64;
        let l = -(-1.0 / pf).ln_1p();
        beta_a *= 1.0 + 1.0 / (pf * (pf - 1.0) * l - 1.0);
    }

    Ok(ConstantsValues {
        k_direct,
        k_alt,
        a0,
        c_titchmarsh,
        beta_a,
    })
}

/// Compute every constant in the bundle for shift `a`, certifying
/// `target_digits` by recomputation at twice the prime cutoff and by the
/// two independent routes to `k`.
pub fn constants(a: u64, budget: &PrecisionBudget) -> Result<ConstantsReport> {
    budget.validate()?;
    if a == 0 {
        return Err(Error::domain("shift a must be ≥ 1"));
    }
    let v1 = constants_at(a, budget)?;
    let v2 = constants_at(a, &budget.doubled())?;

    let tol = 10f64.powi(-(budget.target_digits as i32));
    let mut worst: f64 = 0.0;
    for (x1, x2) in [
        (v1.k_direct, v2.k_direct),
        (v1.k_alt, v2.k_alt),
        (v1.a0, v2.a0),
        (v1.c_titchmarsh, v2.c_titchmarsh),
        (v1.beta_a, v2.beta_a),
        (v1.k_direct, v1.k_alt), // two-route agreement at the given budget
    ] {
        worst = worst.max((x1 - x2).abs() / x1.abs().max(1e-300));
    }
    if worst > tol {
        return Err(Error::Precision {
            requested: budget.target_digits,
            achieved: -worst.log10(),
        });
    }

    Ok(ConstantsReport {
        a,
        k: v1.k_direct,
        beta_a: v1.beta_a,
        k_a: v1.k_direct * v1.beta_a,
        a0: v1.a0,
        c_titchmarsh: v1.c_titchmarsh,
        k_route_delta: (v1.k_direct - v1.k_alt).abs(),
        budget: *budget,
    })
}
