//! Scalar abstraction shared by fields, jets, and the reverse-mode tape.
//!
//! Everything that evaluates a field is written against [`Scalar`], so the
//! same expression can be run on `f64`, on truncated Taylor jets (input
//! derivatives), or on tape variables (parameter derivatives), including
//! nested combinations such as jets of tape variables.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A differentiable scalar number type.
///
/// Branching operations (`smax`, `smin`, `abs`, `max0`, `step`) branch on the
/// primal value; at the breakpoint the derivative convention is the one of
/// the branch that is returned (`max0` and `step` return the zero branch).
pub trait Scalar:
    Copy
    + Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_f64(v: f64) -> Self;
    /// Innermost primal value.
    fn value(&self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    /// Multiply by a plain constant.
    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    /// Integer power; negative exponents go through the reciprocal.
    fn powi(self, n: i32) -> Self;
    /// Real power with a constant exponent (base assumed positive).
    fn powf_c(self, a: f64) -> Self;

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }
    /// `max(0, x)` with derivative 0 at the kink.
    fn max0(self) -> Self {
        if self.value() > 0.0 {
            self
        } else {
            Self::zero()
        }
    }
    /// Heaviside step: 0 for `x < 0`, 1 otherwise; derivative 0 everywhere.
    fn step(self) -> Self {
        if self.value() < 0.0 {
            Self::zero()
        } else {
            Self::one()
        }
    }
    /// Pointwise maximum selected on primal values.
    fn smax(self, other: Self) -> Self {
        if self.value() >= other.value() {
            self
        } else {
            other
        }
    }
    /// Pointwise minimum selected on primal values.
    fn smin(self, other: Self) -> Self {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn powf_c(self, a: f64) -> Self {
        f64::powf(self, a)
    }
}

/// Factorials 0!..8! as `f64`, enough for jets up to order 8.
pub(crate) const FACT: [f64; 9] = [
    1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0,
];
