//! Truncated Taylor jets for forward-mode input derivatives.
//!
//! `Jet<N, S>` carries `N` Taylor coefficients `c[k] = d^k u / ds^k / k!`
//! along one seed direction. Nesting (`Jet<N, Jet<M, f64>>`) yields mixed
//! directional derivatives and is what powers nested operators such as
//! `-grad(phi) . grad(v)` inside a Laplacian.

use crate::scalar::{Scalar, FACT};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Jet<const N: usize, S: Scalar> {
    pub c: [S; N],
}

/// Value + first derivative.
pub type Jet2<S = f64> = Jet<2, S>;
/// Up to second derivative.
pub type Jet3<S = f64> = Jet<3, S>;
/// Up to third derivative.
pub type Jet4<S = f64> = Jet<4, S>;
/// Up to fourth derivative.
pub type Jet5<S = f64> = Jet<5, S>;

impl<const N: usize, S: Scalar> Jet<N, S> {
    pub fn constant(v: S) -> Self {
        let mut c = [S::zero(); N];
        c[0] = v;
        Jet { c }
    }

    /// Seed a coordinate: value `v`, first-order coefficient `d` (the
    /// component of the seed direction along this coordinate).
    pub fn seed(v: S, d: S) -> Self {
        let mut c = [S::zero(); N];
        c[0] = v;
        if N > 1 {
            c[1] = d;
        }
        Jet { c }
    }

    /// k-th derivative (not the raw Taylor coefficient).
    pub fn deriv(&self, k: usize) -> S {
        self.c[k].scale(FACT[k])
    }

    /// Compose with a function given by its derivatives at `c[0]`:
    /// `derivs[m] = g^(m)(c[0])`. Horner scheme on the nilpotent part.
    pub fn compose(&self, derivs: &[S; N]) -> Self {
        let mut hat = *self;
        hat.c[0] = S::zero();
        let mut acc = Self::constant(derivs[N - 1].scale(1.0 / FACT[N - 1]));
        for m in (0..N - 1).rev() {
            acc = hat * acc;
            acc.c[0] += derivs[m].scale(1.0 / FACT[m]);
        }
        acc
    }
}

impl<const N: usize, S: Scalar> Add for Jet<N, S> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<const N: usize, S: Scalar> AddAssign for Jet<N, S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
    }
}

impl<const N: usize, S: Scalar> Sub for Jet<N, S> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<const N: usize, S: Scalar> SubAssign for Jet<N, S> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
    }
}

impl<const N: usize, S: Scalar> Neg for Jet<N, S> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        for k in 0..N {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl<const N: usize, S: Scalar> Mul for Jet<N, S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = [S::zero(); N];
        for i in 0..N {
            for j in 0..N - i {
                out[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Jet { c: out }
    }
}

impl<const N: usize, S: Scalar> Div for Jet<N, S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // c = a / b solved coefficient by coefficient.
        let mut out = [S::zero(); N];
        let inv_b0 = S::one() / rhs.c[0];
        for k in 0..N {
            let mut acc = self.c[k];
            for i in 0..k {
                acc -= out[i] * rhs.c[k - i];
            }
            out[k] = acc * inv_b0;
        }
        Jet { c: out }
    }
}

impl<const N: usize, S: Scalar> Scalar for Jet<N, S> {
    fn from_f64(v: f64) -> Self {
        Self::constant(S::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.c[0].value()
    }

    fn scale(mut self, k: f64) -> Self {
        for i in 0..N {
            self.c[i] = self.c[i].scale(k);
        }
        self
    }

    fn sqrt(self) -> Self {
        // the exact-zero jet maps to itself (locally identically zero),
        // keeping compositions like |max(q,0)| finite away from their
        // active region
        if self.c.iter().all(|c| c.value() == 0.0) {
            return self;
        }
        // y0 = sqrt(z0); yk = (zk - sum_{0<i<k} yi y_{k-i}) / (2 y0)
        let mut out = [S::zero(); N];
        out[0] = self.c[0].sqrt();
        let half_inv = S::from_f64(0.5) / out[0];
        for k in 1..N {
            let mut acc = self.c[k];
            for i in 1..k {
                acc -= out[i] * out[k - i];
            }
            out[k] = acc * half_inv;
        }
        Jet { c: out }
    }

    fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose(&[e; N])
    }

    fn ln(self) -> Self {
        let z = self.c[0];
        let mut d = [S::zero(); N];
        d[0] = z.ln();
        if N > 1 {
            let inv = z.recip();
            let mut p = inv; // (-1)^(m-1) (m-1)! / z^m
            d[1] = p;
            for m in 2..N {
                p = -p * inv * S::from_f64((m - 1) as f64);
                d[m] = p;
            }
        }
        self.compose(&d)
    }

    fn sin(self) -> Self {
        let (s, c) = (self.c[0].sin(), self.c[0].cos());
        let cycle = [s, c, -s, -c];
        let mut d = [S::zero(); N];
        for m in 0..N {
            d[m] = cycle[m % 4];
        }
        self.compose(&d)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.c[0].sin(), self.c[0].cos());
        let cycle = [c, -s, -c, s];
        let mut d = [S::zero(); N];
        for m in 0..N {
            d[m] = cycle[m % 4];
        }
        self.compose(&d)
    }

    fn tanh(self) -> Self {
        let t = self.c[0].tanh();
        let u = S::one() - t * t;
        let mut d = [S::zero(); N];
        d[0] = t;
        if N > 1 {
            d[1] = u;
        }
        if N > 2 {
            d[2] = u * t.scale(-2.0);
        }
        if N > 3 {
            d[3] = u * (t * t.scale(6.0) - S::from_f64(2.0));
        }
        if N > 4 {
            d[4] = u * t * (S::from_f64(16.0) - t * t.scale(24.0));
        }
        debug_assert!(N <= 5, "tanh derivatives implemented up to order 4");
        self.compose(&d)
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        if n < 0 {
            return Self::one() / self.powi(-n);
        }
        // exponentiation by squaring on the truncated algebra
        let mut base = self;
        let mut out: Option<Self> = None;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = Some(match out {
                    Some(o) => o * base,
                    None => base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        out.unwrap()
    }

    fn powf_c(self, a: f64) -> Self {
        let z = self.c[0];
        let mut d = [S::zero(); N];
        let mut coef = 1.0;
        for (m, dm) in d.iter_mut().enumerate() {
            *dm = z.powf_c(a - m as f64).scale(coef);
            coef *= a - m as f64;
        }
        self.compose(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn j5(v: f64) -> Jet5 {
        Jet::seed(v, 1.0)
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // u(x) = 3x^4 - 2x^2 + x at x = 1.3
        let x = j5(1.3);
        let u = x.powi(4).scale(3.0) - x.powi(2).scale(2.0) + x;
        let v: f64 = 1.3;
        assert_relative_eq!(u.deriv(0), 3.0 * v.powi(4) - 2.0 * v * v + v, epsilon = 1e-12);
        assert_relative_eq!(u.deriv(1), 12.0 * v.powi(3) - 4.0 * v + 1.0, epsilon = 1e-12);
        assert_relative_eq!(u.deriv(2), 36.0 * v * v - 4.0, epsilon = 1e-12);
        assert_relative_eq!(u.deriv(3), 72.0 * v, epsilon = 1e-12);
        assert_relative_eq!(u.deriv(4), 72.0, epsilon = 1e-12);
    }

    #[test]
    fn transcendental_derivatives_match_finite_differences() {
        let f = |x: f64| (x.sin() * (0.3 * x).exp() + (x * x + 0.5).ln()).tanh() / x.sqrt();
        let x0 = 1.7;
        let x = j5(x0);
        let u = ((x.sin() * x.scale(0.3).exp() + (x * x + Jet::from_f64(0.5)).ln()).tanh())
            / x.sqrt();
        // central differences on a fine stencil
        let h = 1e-3;
        let fd1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let fd2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
        let fd3 = (f(x0 + 2.0 * h) - 2.0 * f(x0 + h) + 2.0 * f(x0 - h) - f(x0 - 2.0 * h))
            / (2.0 * h * h * h);
        assert_relative_eq!(u.deriv(0), f(x0), epsilon = 1e-12);
        assert_relative_eq!(u.deriv(1), fd1, max_relative = 1e-5);
        assert_relative_eq!(u.deriv(2), fd2, max_relative = 1e-4);
        assert_relative_eq!(u.deriv(3), fd3, max_relative = 1e-3);
    }

    #[test]
    fn division_and_powf_consistency() {
        let x = j5(0.8);
        let a = x.powf_c(-1.5);
        let b = Jet::one() / (x * x.sqrt());
        for k in 0..5 {
            assert_relative_eq!(a.c[k], b.c[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn nested_jets_give_mixed_partials() {
        // u(x, y) = x^2 y^3; d3/dx dy2 = 2x * 6y = 12 x y
        let (x0, y0) = (1.2, 0.7);
        // outer jet in y (order 2), inner jet in x (order 1)
        let x: Jet3<Jet2<f64>> = Jet::constant(Jet::seed(x0, 1.0));
        let y: Jet3<Jet2<f64>> = Jet::seed(Jet::constant(y0), Jet::constant(1.0));
        let u = x.powi(2) * y.powi(3);
        // c[2].c[1] = (1/2!) d^2/dy^2 (1/1!) d/dx u = (1/2) * 12 x y
        let mixed = u.c[2].c[1] * 2.0;
        assert_relative_eq!(mixed, 12.0 * x0 * y0, epsilon = 1e-12);
    }

    #[test]
    fn branch_functions_follow_value() {
        let x = j5(-0.4);
        assert_eq!(x.max0(), Jet::zero());
        assert_eq!(x.step(), Jet::zero());
        let y = j5(0.4);
        assert_eq!(y.max0(), y);
        assert_eq!(y.step().value(), 1.0);
        assert_eq!(x.abs(), -x);
        assert_eq!(x.smax(y), y);
        assert_eq!(x.smin(y), x);
    }
}
