//! Compensated (Neumaier) summation.
//!
//! All long float accumulations in this crate go through [`KahanSum`] so
//! that results are reproducible and carry an error term far below the
//! tolerances used in tests. The variant implemented here is Neumaier's:
//! unlike plain Kahan it also compensates when the incoming term is larger
//! than the running sum.

/// Running compensated sum. `value()` returns `sum + compensation`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one term.
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another partial sum into this one (order-sensitive; callers
    /// that need determinism must merge in a fixed order).
    #[inline]
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.c);
    }

    /// The compensated total.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.c
    }

    /// Raw `(sum, compensation)` pair, exposed so parallel reducers can
    /// ship both parts of a partial result.
    #[inline]
    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.c)
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}
