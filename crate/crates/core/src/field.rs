//! Composable scalar fields.
//!
//! A [`Field`] is an expression tree over point coordinates. Evaluation is
//! generic over [`Scalar`], so the same field yields values on `f64`, input
//! derivatives on jets, and parameter derivatives on tape variables. Fields
//! are pure: evaluation never mutates state.

use crate::jet::{Jet, Jet2};
use crate::scalar::Scalar;
use crate::tape::Var;
use crate::AutodiffError;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Scalar types that can be lifted by one more derivative level.
///
/// Nested operators (`-grad(phi) . grad(v)`, first-order normalization) need
/// to differentiate their operand while being differentiated themselves. The
/// chain of implementations is capped: one inner level on top of any caller
/// jet. Deeper nesting panics at runtime; the solution structures never
/// require it.
pub trait Nest: Scalar {
    type Up: Nest;
    /// Embed as a constant one level up, seeding the derivative slot with `d`.
    fn lift_dir(self, d: f64) -> Self::Up;
    /// First-derivative coefficient of a lifted value.
    fn down1(u: Self::Up) -> Self;
}

impl Nest for f64 {
    type Up = Jet2<f64>;
    fn lift_dir(self, d: f64) -> Jet2<f64> {
        Jet::seed(self, d)
    }
    fn down1(u: Jet2<f64>) -> f64 {
        u.c[1]
    }
}

impl Nest for Var {
    type Up = Jet2<Var>;
    fn lift_dir(self, d: f64) -> Jet2<Var> {
        Jet::seed(self, Var::from_f64(d))
    }
    fn down1(u: Jet2<Var>) -> Var {
        u.c[1]
    }
}

// First nesting level over the two base scalars.
macro_rules! nest_level1 {
    ($($base:ty),*) => {$(
        impl Nest for Jet<2, $base> {
            type Up = Jet<2, Jet<2, $base>>;
            fn lift_dir(self, d: f64) -> Self::Up {
                Jet::seed(self, Self::from_f64(d))
            }
            fn down1(u: Self::Up) -> Self {
                u.c[1]
            }
        }
    )*};
}

// Higher-order caller jets can be lifted once more.
macro_rules! nest_mid {
    ($($n:literal),*) => {$(
        impl<B: Nest> Nest for Jet<$n, B> {
            type Up = Jet<2, Jet<$n, B>>;
            fn lift_dir(self, d: f64) -> Self::Up {
                Jet::seed(self, Self::from_f64(d))
            }
            fn down1(u: Self::Up) -> Self {
                u.c[1]
            }
        }
    )*};
}

// The chain ends here: two inner levels are enough for every structure.
macro_rules! nest_cap {
    ($($n:literal),*) => {$(
        impl<B: Nest> Nest for Jet<2, Jet<$n, B>> {
            type Up = Self;
            fn lift_dir(self, _d: f64) -> Self {
                panic!("nested differentiation deeper than supported");
            }
            fn down1(_u: Self) -> Self {
                panic!("nested differentiation deeper than supported");
            }
        }
    )*};
}

nest_level1!(f64, Var);
nest_mid!(3, 4, 5);
nest_cap!(2, 3, 4, 5);

/// Line segment data used by the closed-form segment fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct SegData {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub len: f64,
    pub mid: [f64; 2],
}

/// One Gauss point on a parametric curve: position, clockwise-rotated
/// tangent scaled by the quadrature weight.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CurveNode {
    pub pos: [f64; 2],
    pub perp_w: [f64; 2],
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Const(f64),
    Coord(usize),
    Add(Field, Field),
    Sub(Field, Field),
    Mul(Field, Field),
    Div(Field, Field),
    Neg(Field),
    Sqrt(Field),
    Exp(Field),
    Ln(Field),
    Sin(Field),
    Cos(Field),
    Tanh(Field),
    Abs(Field),
    Max0(Field),
    Step(Field),
    Powi(Field, i32),
    Powf(Field, f64),
    Max(Field, Field),
    Min(Field, Field),
    LineSigned(SegData),
    Trim(SegData),
    SegmentAdf(SegData),
    CircleAdf { center: Vec<f64>, radius: f64 },
    /// `w / sqrt(w^2 + |grad w|^2)`
    Normalize1(Field),
    RAlpha { a: Field, b: Field, alpha: f64, union: bool },
    RS { a: Field, b: Field, s: i32, union: bool },
    ReqJoin { parts: Vec<Field>, m: i32 },
    RConj { a: Field, b: Field, s: i32 },
    MvpPolyWeight { loops: Arc<Vec<Vec<[f64; 2]>>> },
    MvpPolyAdf { loops: Arc<Vec<Vec<[f64; 2]>>>, eps: f64 },
    MvpCurveAdf { nodes: Arc<Vec<CurveNode>>, polyline: Arc<Vec<[f64; 2]>>, p: i32, eps: f64 },
    Transfinite { pieces: Vec<(Field, Field, i32)> },
    /// `-grad(phi) . grad(v)`
    D1 { phi: Field, v: Field },
}

/// A smooth scalar field over points in `R^d`, cheap to clone and share.
#[derive(Clone, Debug)]
pub struct Field(pub(crate) Arc<Node>);

impl Field {
    pub(crate) fn new(n: Node) -> Self {
        Field(Arc::new(n))
    }

    pub fn constant(v: f64) -> Self {
        Field::new(Node::Const(v))
    }

    /// The `i`-th coordinate as a field.
    pub fn coord(i: usize) -> Self {
        Field::new(Node::Coord(i))
    }

    /// Coordinate `x` in 1D/2D fields.
    pub fn x() -> Self {
        Field::coord(0)
    }

    pub fn y() -> Self {
        Field::coord(1)
    }

    pub fn sqrt(&self) -> Self {
        Field::new(Node::Sqrt(self.clone()))
    }
    pub fn exp(&self) -> Self {
        Field::new(Node::Exp(self.clone()))
    }
    pub fn ln(&self) -> Self {
        Field::new(Node::Ln(self.clone()))
    }
    pub fn sin(&self) -> Self {
        Field::new(Node::Sin(self.clone()))
    }
    pub fn cos(&self) -> Self {
        Field::new(Node::Cos(self.clone()))
    }
    pub fn tanh(&self) -> Self {
        Field::new(Node::Tanh(self.clone()))
    }
    pub fn abs(&self) -> Self {
        Field::new(Node::Abs(self.clone()))
    }
    /// `max(0, f)` with derivative 0 at the kink.
    pub fn relu(&self) -> Self {
        Field::new(Node::Max0(self.clone()))
    }
    /// Heaviside step of the field.
    pub fn step(&self) -> Self {
        Field::new(Node::Step(self.clone()))
    }
    pub fn powi(&self, n: i32) -> Self {
        Field::new(Node::Powi(self.clone(), n))
    }
    pub fn powf(&self, a: f64) -> Self {
        Field::new(Node::Powf(self.clone(), a))
    }
    pub fn max(&self, other: &Field) -> Self {
        Field::new(Node::Max(self.clone(), other.clone()))
    }
    pub fn min(&self, other: &Field) -> Self {
        Field::new(Node::Min(self.clone(), other.clone()))
    }
    pub fn scale(&self, k: f64) -> Self {
        Field::constant(k) * self.clone()
    }

    /// Evaluate at a point with any scalar type.
    pub fn eval<S: Nest>(&self, x: &[S]) -> S {
        match &*self.0 {
            Node::Const(v) => S::from_f64(*v),
            Node::Coord(i) => x[*i],
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Sqrt(a) => a.eval(x).sqrt(),
            Node::Exp(a) => a.eval(x).exp(),
            Node::Ln(a) => a.eval(x).ln(),
            Node::Sin(a) => a.eval(x).sin(),
            Node::Cos(a) => a.eval(x).cos(),
            Node::Tanh(a) => a.eval(x).tanh(),
            Node::Abs(a) => a.eval(x).abs(),
            Node::Max0(a) => a.eval(x).max0(),
            Node::Step(a) => a.eval(x).step(),
            Node::Powi(a, n) => a.eval(x).powi(*n),
            Node::Powf(a, p) => a.eval(x).powf_c(*p),
            Node::Max(a, b) => a.eval(x).smax(b.eval(x)),
            Node::Min(a, b) => a.eval(x).smin(b.eval(x)),
            Node::LineSigned(s) => line_signed(s, x),
            Node::Trim(s) => trim(s, x),
            Node::SegmentAdf(s) => segment_adf(s, x),
            Node::CircleAdf { center, radius } => {
                let mut q = S::zero();
                for (i, c) in center.iter().enumerate() {
                    let d = x[i] - S::from_f64(*c);
                    q += d * d;
                }
                (S::from_f64(radius * radius) - q).scale(1.0 / (2.0 * radius))
            }
            Node::Normalize1(w) => {
                let v = w.eval(x);
                let g2 = grad_norm2(w, x);
                v / (v * v + g2).sqrt()
            }
            Node::RAlpha { a, b, alpha, union } => {
                let (w1, w2) = (a.eval(x), b.eval(x));
                let root = (w1 * w1 + w2 * w2 - (w1 * w2).scale(2.0 * alpha)).sqrt();
                let s = if *union { w1 + w2 + root } else { w1 + w2 - root };
                s.scale(1.0 / (1.0 + alpha))
            }
            Node::RS { a, b, s, union } => {
                let (w1, w2) = (a.eval(x), b.eval(x));
                let q = w1 * w1 + w2 * w2;
                let root = q.sqrt();
                let base = if *union { w1 + w2 + root } else { w1 + w2 - root };
                if *s % 2 == 0 {
                    base * q.powi(*s / 2)
                } else {
                    base * q.powf_c(*s as f64 / 2.0)
                }
            }
            Node::ReqJoin { parts, m } => req_join(parts, *m, x),
            Node::RConj { a, b, s } => {
                let (w1, w2) = (a.eval(x), b.eval(x));
                if w1.value() == 0.0 || w2.value() == 0.0 {
                    return S::zero();
                }
                let inner = w1.powi(*s) + w2.powi(*s);
                w1 + w2 - inner.powf_c(1.0 / *s as f64)
            }
            Node::MvpPolyWeight { loops } => mvp_weight(loops, x),
            Node::MvpPolyAdf { loops, eps } => {
                let p = [x[0].value(), x[1].value()];
                if dist_to_loops(loops, p) <= *eps {
                    return S::zero();
                }
                S::from_f64(2.0) / mvp_weight(loops, x)
            }
            Node::MvpCurveAdf { nodes, polyline, p, eps } => {
                let pv = [x[0].value(), x[1].value()];
                if dist_to_polyline(polyline, pv) <= *eps {
                    return S::zero();
                }
                let w = mvp_curve_weight(nodes, *p, x);
                if *p == 1 {
                    S::from_f64(2.0) / w
                } else {
                    w.powf_c(-1.0 / *p as f64)
                }
            }
            Node::Transfinite { pieces } => transfinite(pieces, x),
            Node::D1 { phi, v } => {
                let mut acc = S::zero();
                for j in 0..x.len() {
                    acc += dir_deriv(phi, x, j) * dir_deriv(v, x, j);
                }
                -acc
            }
        }
    }

    /// Plain `f64` evaluation that reports non-finite results.
    pub fn eval_checked(&self, x: &[f64]) -> Result<f64, AutodiffError> {
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(AutodiffError::NonFiniteEval { point: x.to_vec() })
        }
    }
}

/// Derivative of `f` along coordinate `j` at `x`, one nesting level up.
fn dir_deriv<S: Nest>(f: &Field, x: &[S], j: usize) -> S {
    let mut lifted = [S::Up::zero(); 4];
    for (k, &xk) in x.iter().enumerate() {
        lifted[k] = xk.lift_dir(if k == j { 1.0 } else { 0.0 });
    }
    S::down1(f.eval(&lifted[..x.len()]))
}

fn grad_norm2<S: Nest>(f: &Field, x: &[S]) -> S {
    let mut acc = S::zero();
    for j in 0..x.len() {
        let d = dir_deriv(f, x, j);
        acc += d * d;
    }
    acc
}

fn line_signed<S: Scalar>(s: &SegData, x: &[S]) -> S {
    let (dx, dy) = (s.x2[0] - s.x1[0], s.x2[1] - s.x1[1]);
    ((x[0] - S::from_f64(s.x1[0])).scale(dy) - (x[1] - S::from_f64(s.x1[1])).scale(dx))
        .scale(1.0 / s.len)
}

fn trim<S: Scalar>(s: &SegData, x: &[S]) -> S {
    let dx = x[0] - S::from_f64(s.mid[0]);
    let dy = x[1] - S::from_f64(s.mid[1]);
    (S::from_f64(s.len * s.len / 4.0) - dx * dx - dy * dy).scale(1.0 / s.len)
}

fn segment_adf<S: Scalar>(s: &SegData, x: &[S]) -> S {
    let f = line_signed(s, x);
    let t = trim(s, x);
    let varphi = (t * t + f.powi(4)).sqrt();
    let half = (varphi - t).scale(0.5);
    (f * f + half * half).sqrt()
}

fn req_join<S: Nest>(parts: &[Field], m: i32, x: &[S]) -> S {
    // fixed-order compensated accumulation of sum(phi_i^-m); a zero input
    // absorbs the join without dividing by zero
    let mut sum = S::zero();
    let mut comp = S::zero();
    for p in parts {
        let v = p.eval(x);
        if v.value() == 0.0 {
            return S::zero();
        }
        let term = v.powi(-m);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    match m {
        1 => sum.recip(),
        2 => sum.sqrt().recip(),
        _ => sum.powf_c(-1.0 / m as f64),
    }
}

fn mvp_weight<S: Scalar>(loops: &[Vec<[f64; 2]>], x: &[S]) -> S {
    let mut w = S::zero();
    for lp in loops {
        let n = lp.len();
        for i in 0..n {
            let a = lp[i];
            let b = lp[(i + 1) % n];
            let rax = S::from_f64(a[0]) - x[0];
            let ray = S::from_f64(a[1]) - x[1];
            let rbx = S::from_f64(b[0]) - x[0];
            let rby = S::from_f64(b[1]) - x[1];
            let ra = (rax * rax + ray * ray).sqrt();
            let rb = (rbx * rbx + rby * rby).sqrt();
            let det = rax * rby - ray * rbx;
            let dot = rax * rbx + ray * rby;
            let t = det / (ra * rb + dot);
            w += (ra.recip() + rb.recip()) * t;
        }
    }
    w
}

fn mvp_curve_weight<S: Scalar>(nodes: &[CurveNode], p: i32, x: &[S]) -> S {
    let mut w = S::zero();
    for n in nodes {
        let dx = S::from_f64(n.pos[0]) - x[0];
        let dy = S::from_f64(n.pos[1]) - x[1];
        let num = dx.scale(n.perp_w[0]) + dy.scale(n.perp_w[1]);
        let r2 = dx * dx + dy * dy;
        let denom = if (2 + p) % 2 == 0 {
            r2.powi((2 + p) / 2)
        } else {
            r2.powf_c((2 + p) as f64 / 2.0)
        };
        w += num / denom;
    }
    w
}

fn transfinite<S: Nest>(pieces: &[(Field, Field, i32)], x: &[S]) -> S {
    let m = pieces.len();
    let mut pw = vec![S::zero(); m];
    for (i, (adf, data, mu)) in pieces.iter().enumerate() {
        let v = adf.eval(x);
        if v.value() == 0.0 {
            // boundary hit: exact interpolation; ties resolved to the
            // lowest-index piece
            return data.eval(x);
        }
        pw[i] = v.powi(*mu);
    }
    let mut num = S::zero();
    let mut den = S::zero();
    for i in 0..m {
        let mut prod = S::one();
        for (j, p) in pw.iter().enumerate() {
            if j != i {
                prod = prod * *p;
            }
        }
        num += prod * pieces[i].1.eval(x);
        den += prod;
    }
    num / den
}

/// Anything evaluatable as a scalar field (fields, trial functions).
pub trait FieldEval {
    fn eval_s<S: Nest>(&self, x: &[S]) -> S;
}

impl FieldEval for Field {
    fn eval_s<S: Nest>(&self, x: &[S]) -> S {
        self.eval(x)
    }
}

fn dist_to_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a[0] + t * abx, a[1] + t * aby);
    ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()
}

pub(crate) fn dist_to_loops(loops: &[Vec<[f64; 2]>], p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for lp in loops {
        let n = lp.len();
        for i in 0..n {
            best = best.min(dist_to_segment(lp[i], lp[(i + 1) % n], p));
        }
    }
    best
}

pub(crate) fn dist_to_polyline(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for w in 0..poly.len() {
        best = best.min(dist_to_segment(poly[w], poly[(w + 1) % poly.len()], p));
    }
    best
}

impl Add for Field {
    type Output = Field;
    fn add(self, rhs: Field) -> Field {
        Field::new(Node::Add(self, rhs))
    }
}

impl Sub for Field {
    type Output = Field;
    fn sub(self, rhs: Field) -> Field {
        Field::new(Node::Sub(self, rhs))
    }
}

impl Mul for Field {
    type Output = Field;
    fn mul(self, rhs: Field) -> Field {
        Field::new(Node::Mul(self, rhs))
    }
}

impl Div for Field {
    type Output = Field;
    fn div(self, rhs: Field) -> Field {
        Field::new(Node::Div(self, rhs))
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field::new(Node::Neg(self))
    }
}

impl Add<f64> for Field {
    type Output = Field;
    fn add(self, rhs: f64) -> Field {
        self + Field::constant(rhs)
    }
}

impl Sub<f64> for Field {
    type Output = Field;
    fn sub(self, rhs: f64) -> Field {
        self - Field::constant(rhs)
    }
}

impl Mul<f64> for Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self * Field::constant(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn arithmetic_and_eval() {
        let f = Field::x() * Field::x() + Field::y() * 2.0;
        assert_relative_eq!(f.eval(&[1.5, 2.0]), 6.25, epsilon = 1e-15);
    }

    #[test]
    fn d1_field_is_neg_grad_dot_grad() {
        // phi = x(1-x) in 1D, v = x: D1 = -(1-2x) * 1
        let phi = Field::x() * (Field::constant(1.0) - Field::x());
        let v = Field::x();
        let d1 = Field::new(Node::D1 { phi, v });
        assert_relative_eq!(d1.eval(&[1.0f64]), 1.0, epsilon = 1e-14);
        assert_relative_eq!(d1.eval(&[0.25f64]), -0.5, epsilon = 1e-14);
    }

    #[test]
    fn d1_is_differentiable_once_more() {
        // d/dx of D1(phi, v) with phi = x^2, v = x^3:
        // D1 = -(2x)(3x^2) = -6x^3, derivative -18x^2
        let phi = Field::x().powi(2);
        let v = Field::x().powi(3);
        let d1 = Field::new(Node::D1 { phi, v });
        let x = [Jet2::<f64>::seed(0.5, 1.0)];
        let out = d1.eval(&x);
        assert_relative_eq!(out.c[0], -6.0 * 0.125, epsilon = 1e-13);
        assert_relative_eq!(out.c[1], -18.0 * 0.25, epsilon = 1e-13);
    }
}
