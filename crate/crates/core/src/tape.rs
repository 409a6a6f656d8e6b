//! Reverse-mode accumulation over network parameters.
//!
//! [`Var`] is a [`Scalar`] backed by a thread-local tape. Replaying the tape
//! backwards yields exact parameter gradients; jets stacked on top of `Var`
//! (`Jet<N, Var>`) give reverse-over-forward, so losses that contain input
//! derivatives (Laplacian, biharmonic) remain differentiable in the
//! parameters.

use crate::error::AutodiffError;
use crate::scalar::Scalar;
use std::cell::RefCell;

const NONE: u32 = u32::MAX;

#[derive(Copy, Clone)]
struct Node {
    parent: [u32; 2],
    weight: [f64; 2],
}

thread_local! {
    static TAPE: RefCell<Vec<Node>> = RefCell::new(Vec::new());
}

/// A tape-recorded scalar. Constants are not recorded; every non-constant
/// operation pushes one node holding the local partials.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Var {
    v: f64,
    idx: u32,
}

impl Var {
    fn constant(v: f64) -> Self {
        Var { v, idx: NONE }
    }

    fn push(v: f64, parent: [u32; 2], weight: [f64; 2]) -> Self {
        if parent == [NONE, NONE] {
            return Var::constant(v);
        }
        let idx = TAPE.with(|t| {
            let mut t = t.borrow_mut();
            t.push(Node { parent, weight });
            (t.len() - 1) as u32
        });
        Var { v, idx }
    }

    fn unary(self, v: f64, dv: f64) -> Self {
        Var::push(v, [self.idx, NONE], [dv, 0.0])
    }
}

macro_rules! var_binop {
    ($trait:ident, $fn:ident, $val:expr, $dl:expr, $dr:expr) => {
        impl std::ops::$trait for Var {
            type Output = Var;
            #[inline]
            fn $fn(self, rhs: Var) -> Var {
                Var::push(
                    $val(self.v, rhs.v),
                    [self.idx, rhs.idx],
                    [$dl(self.v, rhs.v), $dr(self.v, rhs.v)],
                )
            }
        }
    };
}

var_binop!(Add, add, |a: f64, b: f64| a + b, |_a, _b| 1.0, |_a, _b| 1.0);
var_binop!(Sub, sub, |a: f64, b: f64| a - b, |_a, _b| 1.0, |_a, _b| -1.0);
var_binop!(Mul, mul, |a: f64, b: f64| a * b, |_a, b: f64| b, |a: f64, _b| a);
var_binop!(
    Div,
    div,
    |a: f64, b: f64| a / b,
    |_a, b: f64| 1.0 / b,
    |a: f64, b: f64| -a / (b * b)
);

impl std::ops::Neg for Var {
    type Output = Var;
    fn neg(self) -> Var {
        self.unary(-self.v, -1.0)
    }
}

impl std::ops::AddAssign for Var {
    fn add_assign(&mut self, rhs: Var) {
        *self = *self + rhs;
    }
}

impl std::ops::SubAssign for Var {
    fn sub_assign(&mut self, rhs: Var) {
        *self = *self - rhs;
    }
}

impl Scalar for Var {
    fn from_f64(v: f64) -> Self {
        Var::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn scale(self, k: f64) -> Self {
        self.unary(self.v * k, k)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.unary(s, 0.5 / s)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.unary(e, e)
    }
    fn ln(self) -> Self {
        self.unary(self.v.ln(), 1.0 / self.v)
    }
    fn sin(self) -> Self {
        self.unary(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.unary(self.v.cos(), -self.v.sin())
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.unary(t, 1.0 - t * t)
    }
    fn powi(self, n: i32) -> Self {
        self.unary(self.v.powi(n), n as f64 * self.v.powi(n - 1))
    }
    fn powf_c(self, a: f64) -> Self {
        self.unary(self.v.powf(a), a * self.v.powf(a - 1.0))
    }
    fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
    fn max0(self) -> Self {
        if self.v > 0.0 {
            self
        } else {
            Var::constant(0.0)
        }
    }
    fn step(self) -> Self {
        Var::constant(if self.v < 0.0 { 0.0 } else { 1.0 })
    }
}

/// Gradient of a scalar loss with respect to `theta` by reverse accumulation.
///
/// The closure sees `theta` as tape variables; any computation built from
/// [`Scalar`] operations (including jets over `Var`) is recorded. Parameters
/// the loss never touches get an exact zero. Non-finite components are
/// reported with the offending parameter index.
pub fn param_gradient<F>(theta: &[f64], loss: F) -> Result<Vec<f64>, AutodiffError>
where
    F: FnOnce(&[Var]) -> Var,
{
    // leaf parameters occupy the first tape slots
    TAPE.with(|t| t.borrow_mut().clear());
    let vars: Vec<Var> = theta
        .iter()
        .map(|&v| {
            let idx = TAPE.with(|t| {
                let mut t = t.borrow_mut();
                t.push(Node {
                    parent: [NONE, NONE],
                    weight: [0.0, 0.0],
                });
                (t.len() - 1) as u32
            });
            Var { v, idx }
        })
        .collect();
    let out = loss(&vars);
    if !out.v.is_finite() {
        return Err(AutodiffError::NonFiniteLoss(out.v));
    }
    let grad = TAPE.with(|t| {
        let t = t.borrow();
        let mut adj = vec![0.0f64; t.len()];
        if out.idx != NONE {
            adj[out.idx as usize] = 1.0;
            for i in (0..t.len()).rev() {
                let a = adj[i];
                if a == 0.0 {
                    continue;
                }
                let n = &t[i];
                for s in 0..2 {
                    if n.parent[s] != NONE {
                        adj[n.parent[s] as usize] += a * n.weight[s];
                    }
                }
            }
        }
        vars.iter().map(|v| adj[v.idx as usize]).collect::<Vec<_>>()
    });
    TAPE.with(|t| t.borrow_mut().clear());
    for (i, g) in grad.iter().enumerate() {
        if !g.is_finite() {
            return Err(AutodiffError::NonFiniteGradient { index: i, value: *g });
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet3;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_gradient_is_theta() {
        let theta = [0.3, -1.2, 2.5];
        let g = param_gradient(&theta, |t| {
            let mut s = Var::from_f64(0.0);
            for v in t {
                s += *v * *v;
            }
            s.scale(0.5)
        })
        .unwrap();
        for (gi, ti) in g.iter().zip(theta.iter()) {
            assert_relative_eq!(gi, ti, epsilon = 1e-14);
        }
    }

    #[test]
    fn untouched_parameter_has_exact_zero() {
        let theta = [1.0, 2.0];
        let g = param_gradient(&theta, |t| t[0].sin()).unwrap();
        assert_eq!(g[1], 0.0);
        assert_relative_eq!(g[0], 1.0f64.cos(), epsilon = 1e-14);
    }

    #[test]
    fn jets_over_vars_differentiate_input_derivatives() {
        // loss = u''(x0) where u(x) = theta0 * x^3 => u'' = 6 theta0 x0
        // d loss / d theta0 = 6 x0
        let x0 = 0.7;
        let g = param_gradient(&[2.0], |t| {
            let x: Jet3<Var> = Jet::seed(Var::from_f64(x0), Var::from_f64(1.0));
            let u = Jet3::<Var>::constant(t[0]) * x.powi(3);
            u.deriv(2)
        })
        .unwrap();
        assert_relative_eq!(g[0], 6.0 * x0, epsilon = 1e-12);
    }

    use crate::jet::Jet;

    #[test]
    fn matches_finite_differences_on_composite_loss() {
        let theta = [0.4, -0.9, 1.3];
        let f = |t: &[f64]| (t[0] * t[1].tanh() + (t[2] * t[2] + 1.0).ln()).exp();
        let g = param_gradient(&theta, |t| {
            (t[0] * t[1].tanh() + (t[2] * t[2] + Var::from_f64(1.0)).ln()).exp()
        })
        .unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut tp = theta;
            tp[i] += h;
            let mut tm = theta;
            tm[i] -= h;
            let fd = (f(&tp) - f(&tm)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, max_relative = 1e-7);
        }
    }
}
