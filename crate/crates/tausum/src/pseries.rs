//! Fixed-order truncated power series over `f64`.
//!
//! Just enough series arithmetic to derive, symbolically in `t = 1/p`, the
//! logarithms of the per-prime local factors used by the Euler-product
//! engine: products, reciprocals, logs and binomial powers, all truncated
//! at a fixed order. Coefficient `a[k]` multiplies `t^k`.

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Ps {
    pub a: Vec<f64>,
}

impl Ps {
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn from_coeffs(a: Vec<f64>) -> Self {
        assert!(!a.is_empty());
        Ps { a }
    }

    /// The constant series 1.
    pub fn one(order: usize) -> Self {
        let mut a = vec![0.0; order + 1];
        a[0] = 1.0;
        Ps { a }
    }

    /// `Σ t^k` = 1/(1-t).
    pub fn geometric(order: usize) -> Self {
        Ps {
            a: vec![1.0; order + 1],
        }
    }

    /// `L(t)/t = Σ t^k/(k+1)` where `L(t) = -ln(1-t)`.
    pub fn log_over_t(order: usize) -> Self {
        Ps {
            a: (0..=order).map(|k| 1.0 / (k + 1) as f64).collect(),
        }
    }

    /// `(1-t)^alpha` by the binomial recurrence.
    pub fn one_minus_t_pow(alpha: f64, order: usize) -> Self {
        let mut a = vec![0.0; order + 1];
        a[0] = 1.0;
        for k in 1..=order {
            a[k] = -a[k - 1] * (alpha - (k - 1) as f64) / k as f64;
        }
        Ps { a }
    }

    pub fn mul(&self, rhs: &Ps) -> Ps {
        let order = self.order().min(rhs.order());
        let mut a = vec![0.0; order + 1];
        for i in 0..=order {
            if self.a[i] == 0.0 {
                continue;
            }
            for j in 0..=order - i {
                a[i + j] += self.a[i] * rhs.a[j];
            }
        }
        Ps { a }
    }

    pub fn sub(&self, rhs: &Ps) -> Ps {
        let order = self.order().min(rhs.order());
        Ps {
            a: (0..=order).map(|k| self.a[k] - rhs.a[k]).collect(),
        }
    }

    /// Multiply by `t` (drops the top coefficient).
    pub fn shift_up(&self) -> Ps {
        let mut a = vec![0.0; self.a.len()];
        a[1..].copy_from_slice(&self.a[..self.a.len() - 1]);
        Ps { a }
    }

    /// Multiplicative inverse; needs `a[0] != 0`.
    #[cfg(test)]
    pub fn recip(&self) -> Ps {
        assert!(self.a[0] != 0.0, "series with zero constant term");
        let order = self.order();
        let mut b = vec![0.0; order + 1];
        b[0] = 1.0 / self.a[0];
        for n in 1..=order {
            let mut acc = 0.0;
            for j in 1..=n {
                acc += self.a[j] * b[n - j];
            }
            b[n] = -acc / self.a[0];
        }
        Ps { a: b }
    }

    /// Logarithm; needs `a[0] == 1`. Uses `(ln f)' = f'/f` termwise:
    /// `n·l_n = n·a_n - Σ_{j=1..n-1} j·l_j·a_{n-j}`.
    pub fn ln(&self) -> Ps {
        assert!(
            (self.a[0] - 1.0).abs() < 1e-12,
            "log of a series with constant term != 1"
        );
        let order = self.order();
        let mut l = vec![0.0; order + 1];
        for n in 1..=order {
            let mut acc = n as f64 * self.a[n];
            for (j, &lj) in l.iter().enumerate().take(n).skip(1) {
                acc -= j as f64 * lj * self.a[n - j];
            }
            l[n] = acc / n as f64;
        }
        Ps { a: l }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Ps, b: &[f64], tol: f64) {
        for (k, (x, y)) in a.a.iter().zip(b.iter()).enumerate() {
            assert!((x - y).abs() < tol, "coeff {k}: {x} vs {y}");
        }
    }

    #[test]
    fn recip_of_log_over_t_gives_gregory_coefficients() {
        let g = Ps::log_over_t(8).recip();
        let expect = crate::gregory::gregory_coefficients(8).unwrap();
        close(&g, &expect.c, 1e-15);
    }

    #[test]
    fn ln_of_geometric_is_harmonic() {
        // ln(1/(1-t)) = Σ t^k/k.
        let l = Ps::geometric(10).ln();
        let expect: Vec<f64> = (0..=10)
            .map(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 })
            .collect();
        close(&l, &expect, 1e-15);
    }

    #[test]
    fn binomial_power_squares_back() {
        // ((1-t)^{1/2})² = 1 - t.
        let h = Ps::one_minus_t_pow(0.5, 12);
        let sq = h.mul(&h);
        let mut expect = vec![0.0; 13];
        expect[0] = 1.0;
        expect[1] = -1.0;
        close(&sq, &expect, 1e-14);
    }

    #[test]
    fn mul_recip_roundtrip() {
        let f = Ps::from_coeffs(vec![1.0, 0.3, -0.2, 0.05, 0.0, 0.7]);
        let id = f.mul(&f.recip());
        close(&id, &Ps::one(5).a, 1e-13);
    }
}
