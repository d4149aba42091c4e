//! Scalars with a standard deviation and first-order propagation.
//!
//! The default combination assumes independent operands. Two further forms
//! cover the statistics in this crate: [`contrast`] for `(a − b)/(a + b)`
//! ratios whose numerator and denominator share counts, and the `*_worst_case`
//! combinations for operands with unknown (possibly full) correlation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UncertainValue {
    pub value: f64,
    pub sigma: f64,
}

impl UncertainValue {
    pub fn new(value: f64, sigma: f64) -> Result<Self> {
        if !value.is_finite() || !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Domain(format!(
                "uncertain value needs finite value and sigma >= 0, got {value} ± {sigma}"
            )));
        }
        Ok(Self { value, sigma })
    }

    pub const fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }

    pub fn relative(&self) -> f64 {
        self.sigma / self.value.abs()
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            sigma: self.sigma * k.abs(),
        }
    }

    /// Quotient with independent operands.
    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        uv_ratio(self, rhs)
    }

    /// Quotient whose relative errors add linearly (operands of unknown correlation).
    pub fn div_worst_case(self, rhs: Self) -> Result<Self> {
        if rhs.value == 0.0 {
            return Err(Error::Division("denominator value is zero".into()));
        }
        let q = self.value / rhs.value;
        let rel_a = if self.value == 0.0 { 0.0 } else { self.relative() };
        let sigma = if self.value == 0.0 {
            self.sigma / rhs.value.abs()
        } else {
            q.abs() * (rel_a + rhs.relative())
        };
        Ok(Self { value: q, sigma })
    }

    /// Difference whose sigmas add linearly.
    pub fn sub_worst_case(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            sigma: self.sigma + rhs.sigma,
        }
    }

    /// `f(self)` given the derivative `df` at `self.value`.
    pub fn map(self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        Self {
            value: f(self.value),
            sigma: (df(self.value) * self.sigma).abs(),
        }
    }

    /// `value / sigma`, or `None` when sigma is zero.
    pub fn significance(&self) -> Option<f64> {
        (self.sigma > 0.0).then(|| self.value / self.sigma)
    }
}

impl fmt::Display for UncertainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.value, self.sigma)
    }
}

impl Add for UncertainValue {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            sigma: self.sigma.hypot(rhs.sigma),
        }
    }
}

impl Sub for UncertainValue {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            sigma: self.sigma.hypot(rhs.sigma),
        }
    }
}

impl Mul for UncertainValue {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self {
            value: self.value * rhs.value,
            sigma: (self.sigma * rhs.value).hypot(self.value * rhs.sigma),
        }
    }
}

impl Neg for UncertainValue {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            value: -self.value,
            sigma: self.sigma,
        }
    }
}

/// `a / b` with first-order propagation for independent operands.
pub fn uv_ratio(a: UncertainValue, b: UncertainValue) -> Result<UncertainValue> {
    if b.value == 0.0 {
        return Err(Error::Division("denominator value is zero".into()));
    }
    let q = a.value / b.value;
    let sigma = (a.sigma / b.value).hypot(q * b.sigma / b.value);
    Ok(UncertainValue { value: q, sigma })
}

/// `(a − b) / (a + b)` for independent `a`, `b`.
///
/// Propagates through the exact gradient `(2b, −2a) / (a + b)²` rather than
/// treating numerator and denominator as independent.
pub fn contrast(a: UncertainValue, b: UncertainValue) -> Result<UncertainValue> {
    let s = a.value + b.value;
    if s == 0.0 {
        return Err(Error::Division("a + b is zero in contrast ratio".into()));
    }
    let value = (a.value - b.value) / s;
    let sigma = 2.0 * (b.value * a.sigma).hypot(a.value * b.sigma) / (s * s);
    Ok(UncertainValue { value, sigma })
}
