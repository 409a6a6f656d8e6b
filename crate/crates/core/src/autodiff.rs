//! Input-space derivatives of scalar fields.
//!
//! Gradients, Laplacians, and biharmonics are computed with truncated
//! Taylor jets seeded per direction; the `u_xxyy` cross term comes from
//! directional fourth derivatives along `(1,1)` and `(1,-1)` via the
//! polarization identity, avoiding a full fourth-order tensor.
//!
//! Parameter-space gradients live in [`crate::tape`] and are re-exported
//! here.

use crate::error::AutodiffError;
use crate::field::{FieldEval, Nest};
use crate::jet::{Jet, Jet2, Jet3, Jet5};

pub use crate::tape::param_gradient;

fn seed_point<const N: usize>(x: &[f64], dir: &[f64]) -> Vec<Jet<N, f64>> {
    x.iter().zip(dir).map(|(&v, &d)| Jet::seed(v, d)).collect()
}

fn unit(d: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[j] = 1.0;
    v
}

/// Exact gradient of `f` at `x` (forward jets, not finite differences).
pub fn grad_input<F: FieldEval>(f: &F, x: &[f64]) -> Result<Vec<f64>, AutodiffError> {
    let mut g = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let p: Vec<Jet2<f64>> = seed_point(x, &unit(x.len(), j));
        let out = f.eval_s(&p);
        if !out.c[1].is_finite() {
            return Err(AutodiffError::NonFiniteEval { point: x.to_vec() });
        }
        g.push(out.c[1]);
    }
    Ok(g)
}

/// Sum of pure second derivatives of `f` at `x`.
pub fn laplacian<F: FieldEval>(f: &F, x: &[f64]) -> Result<f64, AutodiffError> {
    let mut acc = 0.0;
    for j in 0..x.len() {
        let p: Vec<Jet3<f64>> = seed_point(x, &unit(x.len(), j));
        let out = f.eval_s(&p);
        acc += 2.0 * out.c[2];
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(AutodiffError::NonFiniteEval { point: x.to_vec() })
    }
}

fn fourth_directional<F: FieldEval>(f: &F, x: &[f64], dir: &[f64]) -> f64 {
    let p: Vec<Jet5<f64>> = seed_point(x, dir);
    24.0 * f.eval_s(&p).c[4]
}

/// Biharmonic `u_xxxx + 2 u_xxyy + u_yyyy` (in 1D, just `u''''`).
///
/// In 2D the cross term is recovered from directional fourth derivatives:
/// `D^4_(1,1) + D^4_(1,-1) = 2 u_xxxx + 12 u_xxyy + 2 u_yyyy`.
pub fn biharmonic<F: FieldEval>(f: &F, x: &[f64]) -> Result<f64, AutodiffError> {
    let v = match x.len() {
        1 => fourth_directional(f, x, &[1.0]),
        2 => {
            let d4x = fourth_directional(f, x, &[1.0, 0.0]);
            let d4y = fourth_directional(f, x, &[0.0, 1.0]);
            let d4p = fourth_directional(f, x, &[1.0, 1.0]);
            let d4m = fourth_directional(f, x, &[1.0, -1.0]);
            (2.0 / 3.0) * (d4x + d4y) + (d4p + d4m) / 6.0
        }
        d => return Err(AutodiffError::NonFiniteEval { point: vec![d as f64] }),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(AutodiffError::NonFiniteEval { point: x.to_vec() })
    }
}

/// Value, gradient, and Laplacian in one call (used by residual checks).
pub fn value_grad_lap<F: FieldEval>(
    f: &F,
    x: &[f64],
) -> Result<(f64, Vec<f64>, f64), AutodiffError> {
    let mut g = Vec::with_capacity(x.len());
    let mut lap = 0.0;
    let mut val = 0.0;
    for j in 0..x.len() {
        let p: Vec<Jet3<f64>> = seed_point(x, &unit(x.len(), j));
        let out = f.eval_s(&p);
        val = out.c[0];
        g.push(out.c[1]);
        lap += 2.0 * out.c[2];
    }
    if val.is_finite() && lap.is_finite() && g.iter().all(|v| v.is_finite()) {
        Ok((val, g, lap))
    } else {
        Err(AutodiffError::NonFiniteEval { point: x.to_vec() })
    }
}

/// Central finite differences; the independent check used throughout the
/// test suites against the jet-based derivatives.
pub mod fd {
    /// First directional derivative, O(h^2).
    pub fn d1<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], dir: &[f64], h: f64) -> f64 {
        let shift = |s: f64| -> Vec<f64> {
            x.iter().zip(dir).map(|(&v, &d)| v + s * d).collect()
        };
        (f(&shift(h)) - f(&shift(-h))) / (2.0 * h)
    }

    /// Second directional derivative, O(h^2).
    pub fn d2<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], dir: &[f64], h: f64) -> f64 {
        let shift = |s: f64| -> Vec<f64> {
            x.iter().zip(dir).map(|(&v, &d)| v + s * d).collect()
        };
        (f(&shift(h)) - 2.0 * f(x) + f(&shift(-h))) / (h * h)
    }

    /// Fourth directional derivative, O(h^2).
    pub fn d4<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], dir: &[f64], h: f64) -> f64 {
        let shift = |s: f64| -> Vec<f64> {
            x.iter().zip(dir).map(|(&v, &d)| v + s * d).collect()
        };
        (f(&shift(2.0 * h)) - 4.0 * f(&shift(h)) + 6.0 * f(x) - 4.0 * f(&shift(-h))
            + f(&shift(-2.0 * h)))
            / h.powi(4)
    }

    /// Finite-difference Laplacian.
    pub fn laplacian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> f64 {
        (0..x.len())
            .map(|j| {
                let mut dir = vec![0.0; x.len()];
                dir[j] = 1.0;
                d2(f, x, &dir, h)
            })
            .sum()
    }
}

/// Evaluate a [`FieldEval`] at an `f64` point.
pub fn eval_f64<F: FieldEval>(f: &F, x: &[f64]) -> f64 {
    f.eval_s(x)
}

impl<F: FieldEval> FieldEval for &F {
    fn eval_s<S: Nest>(&self, x: &[S]) -> S {
        (*self).eval_s(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::geometry::{circle_adf, Point};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gradient_of_quadratic() {
        let f = Field::x() * Field::x() + Field::y() * Field::y();
        let g = grad_input(&f, &[1.0, 2.0]).unwrap();
        assert_relative_eq!(g[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 4.0, epsilon = 1e-14);
    }

    #[test]
    fn gradient_of_unit_circle_adf_points_inward() {
        let phi = circle_adf(&Point::xy(0.0, 0.0), 1.0).unwrap();
        let g = grad_input(&phi, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(g[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let f = Field::constant(3.5);
        let g = grad_input(&f, &[0.3, -0.7]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn laplacian_examples() {
        let f = Field::x() * Field::x() + Field::y() * Field::y();
        assert_relative_eq!(laplacian(&f, &[0.3, -2.0]).unwrap(), 4.0, epsilon = 1e-13);

        let g = (Field::x().scale(PI)).sin() * (Field::y().scale(PI)).sin();
        assert_relative_eq!(
            laplacian(&g, &[0.5, 0.5]).unwrap(),
            -2.0 * PI * PI,
            epsilon = 1e-10
        );

        let phi = circle_adf(&Point::xy(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(laplacian(&phi, &[0.2, 0.6]).unwrap(), -2.0, epsilon = 1e-13);
    }

    #[test]
    fn biharmonic_examples() {
        // (1 - r^2)^2 / 64 solves biharmonic(u) = 1
        let r2 = Field::x() * Field::x() + Field::y() * Field::y();
        let u = (Field::constant(1.0) - r2.clone()) * (Field::constant(1.0) - r2) *
            Field::constant(1.0 / 64.0);
        for p in [[0.0, 0.0], [0.3, 0.2], [-0.5, 0.1]] {
            assert_relative_eq!(biharmonic(&u, &p).unwrap(), 1.0, epsilon = 1e-11);
        }

        let cubic = Field::x().powi(3) + Field::y().powi(2) * Field::x();
        assert_relative_eq!(biharmonic(&cubic, &[0.4, 0.9]).unwrap(), 0.0, epsilon = 1e-11);

        let x4 = Field::x().powi(4);
        assert_relative_eq!(biharmonic(&x4, &[0.7, -0.3]).unwrap(), 24.0, epsilon = 1e-10);
        assert_relative_eq!(biharmonic(&x4, &[0.7]).unwrap(), 24.0, epsilon = 1e-10);
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let f = (Field::x() * Field::y().scale(0.7)).tanh()
            + (Field::x() * Field::x() + Field::constant(1.0)).ln();
        let x = [0.6, -0.4];
        let ff = |p: &[f64]| f.eval(p);
        let g = grad_input(&f, &x).unwrap();
        for j in 0..2 {
            let mut dir = [0.0; 2];
            dir[j] = 1.0;
            assert_relative_eq!(g[j], fd::d1(&ff, &x, &dir, 1e-5), max_relative = 1e-8);
        }
        assert_relative_eq!(
            laplacian(&f, &x).unwrap(),
            fd::laplacian(&ff, &x, 1e-4),
            max_relative = 1e-6
        );
    }
}
