//! Weights over the tropical and log semirings.
//!
//! Both semirings store a negative log probability. They differ only in how
//! parallel paths aggregate: the tropical semiring keeps the cheaper one, the
//! log semiring adds their probabilities.

use std::fmt;

/// A semiring `(K, ⊕, ⊗, 0̄, 1̄)` over negative log values.
///
/// `⊗` is ordinary addition in both implementations, `0̄` is `+∞` and `1̄` is
/// `0.0`; implementations only choose `⊕`.
pub trait Semiring: Copy + fmt::Debug + PartialEq + Send + Sync + 'static {
    const NAME: &'static str;

    fn new(value: f64) -> Self;
    fn value(self) -> f64;

    fn zero() -> Self {
        Self::new(f64::INFINITY)
    }

    fn one() -> Self {
        Self::new(0.0)
    }

    fn plus(self, rhs: Self) -> Self;

    fn times(self, rhs: Self) -> Self {
        let (a, b) = (self.value(), rhs.value());
        if a == f64::INFINITY || b == f64::INFINITY {
            Self::zero()
        } else {
            Self::new(a + b)
        }
    }

    fn is_zero(self) -> bool {
        self.value() == f64::INFINITY
    }

    fn is_one(self) -> bool {
        self.value() == 0.0
    }

    fn from_prob(p: f64) -> Self {
        if p <= 0.0 {
            Self::zero()
        } else {
            Self::new(-p.ln())
        }
    }

    fn to_prob(self) -> f64 {
        (-self.value()).exp()
    }

    /// Equality up to `delta`, with matching infinities treated as equal.
    fn approx_eq(self, other: Self, delta: f64) -> bool {
        let (a, b) = (self.value(), other.value());
        if a.is_infinite() || b.is_infinite() {
            return a == b;
        }
        (a - b).abs() <= delta
    }
}

/// `(min, +)` over costs.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct TropicalWeight(f64);

/// `(-log(e^-a + e^-b), +)` over costs.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LogWeight(f64);

impl Semiring for TropicalWeight {
    const NAME: &'static str = "tropical";

    #[inline]
    fn new(value: f64) -> Self {
        TropicalWeight(value)
    }

    #[inline]
    fn value(self) -> f64 {
        self.0
    }

    #[inline]
    fn plus(self, rhs: Self) -> Self {
        if rhs.0 < self.0 {
            rhs
        } else {
            self
        }
    }
}

impl Semiring for LogWeight {
    const NAME: &'static str = "log";

    #[inline]
    fn new(value: f64) -> Self {
        LogWeight(value)
    }

    #[inline]
    fn value(self) -> f64 {
        self.0
    }

    #[inline]
    fn plus(self, rhs: Self) -> Self {
        LogWeight(log_add(self.0, rhs.0))
    }
}

/// `-log(exp(-a) + exp(-b))`, stable for large magnitudes.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY {
        return b;
    }
    if b == f64::INFINITY {
        return a;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    lo - (-(hi - lo)).exp().ln_1p()
}

impl fmt::Debug for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({})", self.0)
    }
}

impl fmt::Debug for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({})", self.0)
    }
}

impl fmt::Display for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        -20.0f64..20.0
    }

    fn check_laws<W: Semiring>(a: f64, b: f64, c: f64, tol: f64) {
        let (a, b, c) = (W::new(a), W::new(b), W::new(c));
        assert!(a.plus(b).plus(c).approx_eq(a.plus(b.plus(c)), tol));
        assert!(a.times(b).times(c).approx_eq(a.times(b.times(c)), tol));
        assert!(a.plus(b).approx_eq(b.plus(a), tol));
        assert!(a.times(b.plus(c)).approx_eq(a.times(b).plus(a.times(c)), tol));
        assert!(b.plus(c).times(a).approx_eq(b.times(a).plus(c.times(a)), tol));
        assert!(a.plus(W::zero()).approx_eq(a, tol));
        assert!(a.times(W::one()).approx_eq(a, tol));
        assert!(W::one().times(a).approx_eq(a, tol));
        assert!(a.times(W::zero()).is_zero());
        assert!(W::zero().times(a).is_zero());
    }

    proptest! {
        #[test]
        fn tropical_semiring_laws(a in finite(), b in finite(), c in finite()) {
            check_laws::<TropicalWeight>(a, b, c, 1e-12);
        }

        #[test]
        fn log_semiring_laws(a in finite(), b in finite(), c in finite()) {
            check_laws::<LogWeight>(a, b, c, 1e-9);
        }
    }

    #[test]
    fn log_plus_adds_probabilities() {
        let w = LogWeight::from_prob(0.25).plus(LogWeight::from_prob(0.5));
        assert!((w.to_prob() - 0.75).abs() < 1e-12);
        assert_eq!(TropicalWeight::new(1.0).plus(TropicalWeight::new(2.0)).value(), 1.0);
    }

    #[test]
    fn log_add_handles_infinity() {
        assert_eq!(log_add(f64::INFINITY, 3.0), 3.0);
        assert_eq!(log_add(f64::INFINITY, f64::INFINITY), f64::INFINITY);
    }
}
