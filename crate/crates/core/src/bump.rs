//! C∞ plateau profiles on `[0, 1]`.
//!
//! `b(r) = 1` on `[0, inner]`, `b(r) = 0` on `[outer, 1]`, and in between the
//! mollifier transition
//!
//! ```text
//! b = ψ(1-u) / (ψ(u) + ψ(1-u)),   ψ(s) = exp(-1/s),   u = (r - inner) / (outer - inner)
//! ```
//!
//! which is flat to all orders at both junctions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    inner: f64,
    outer: f64,
}

impl Default for BumpProfile {
    /// Plateau on `[0, 1/3]`, zero on `[2/3, 1]`.
    fn default() -> Self {
        Self {
            inner: 1.0 / 3.0,
            outer: 2.0 / 3.0,
        }
    }
}

impl BumpProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        let ok = inner.is_finite() && outer.is_finite() && 0.0 < inner && inner < outer && outer <= 1.0;
        if !ok {
            return Err(Error::InvalidProfile { inner, outer });
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    fn width(&self) -> f64 {
        self.outer - self.inner
    }

    /// Exponent `e(u) = 1/(1-u) - 1/u`, so that `b = 1 / (1 + exp(e))`.
    fn exponent(u: f64) -> f64 {
        1.0 / (1.0 - u) - 1.0 / u
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let u = (r - self.inner) / self.width();
        let e = Self::exponent(u);
        let w = (-e.abs()).exp();
        if e > 0.0 {
            w / (1.0 + w)
        } else {
            1.0 / (1.0 + w)
        }
    }

    /// `b'(r)`; zero on both plateaus and, by definition, at the junctions.
    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            return 0.0;
        }
        let u = (r - self.inner) / self.width();
        let e = Self::exponent(u);
        let w = (-e.abs()).exp();
        // σ(e)σ(-e) written so that it cannot overflow
        let logistic_slope = w / ((1.0 + w) * (1.0 + w));
        let de_du = 1.0 / ((1.0 - u) * (1.0 - u)) + 1.0 / (u * u);
        -logistic_slope * de_du / self.width()
    }

    /// `∫₀¹ b(r) dr`.
    ///
    /// The transition is antisymmetric about its midpoint (`b(u) + b(1-u) = 1`),
    /// so the integral is exactly `inner + (outer - inner) / 2`.
    pub fn integral(&self) -> f64 {
        0.5 * (self.inner + self.outer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(BumpProfile::new(0.0, 0.5).is_err());
        assert!(BumpProfile::new(0.5, 0.5).is_err());
        assert!(BumpProfile::new(0.3, 1.1).is_err());
        assert!(BumpProfile::new(f64::NAN, 0.5).is_err());
        assert!(BumpProfile::new(0.3, 1.0).is_ok());
    }

    #[test]
    fn plateaus_and_range() {
        let b = BumpProfile::default();
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(1.0 / 3.0), 1.0);
        assert_eq!(b.value(2.0 / 3.0), 0.0);
        assert_eq!(b.value(1.0), 0.0);
        assert!((b.value(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let r = i as f64 / 1000.0;
            let v = b.value(r);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            assert!(b.derivative(r) <= 0.0);
            prev = v;
        }
    }

    #[test]
    fn strictly_decreasing_in_transition() {
        let b = BumpProfile::new(0.2, 0.9).unwrap();
        let mut prev = b.value(0.21);
        for i in 1..60 {
            let r = 0.21 + i as f64 * 0.01;
            let v = b.value(r);
            assert!(v < prev, "r={r}");
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        for b in [BumpProfile::default(), BumpProfile::new(0.1, 0.95).unwrap()] {
            let h = 1e-6;
            let n = 400;
            for i in 1..n {
                let r = b.inner() + (b.outer() - b.inner()) * i as f64 / n as f64;
                if r - h <= b.inner() || r + h >= b.outer() {
                    continue;
                }
                let fd = (b.value(r + h) - b.value(r - h)) / (2.0 * h);
                let an = b.derivative(r);
                assert!((fd - an).abs() < 1e-6, "r={r} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn flat_at_junctions() {
        let b = BumpProfile::default();
        assert!(b.derivative(b.inner() + 1e-4).abs() < 1e-100);
        assert!(b.derivative(b.outer() - 1e-4).abs() < 1e-100);
        assert!((1.0 - b.value(b.inner() + 1e-3)).abs() < 1e-100);
    }

    #[test]
    fn integral_matches_fine_midpoint_sum() {
        let b = BumpProfile::new(0.25, 0.8).unwrap();
        let n = 200_000;
        let s: f64 = (0..n).map(|i| b.value((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        assert!((s - b.integral()).abs() < 1e-10);
    }
}
