//! Approximate distance fields to boundary pieces and whole boundaries.
//!
//! Segment and circle ADFs are closed-form. Whole boundaries are joined by
//! R-equivalence or built from mean-value potentials; transfinite
//! interpolation blends per-piece boundary data. Every constructor returns a
//! [`Field`] so the result composes with everything else and propagates
//! input derivatives up to fourth order.

use crate::error::GeometryError;
use crate::field::{CurveNode, Field, Node, SegData};
use std::path::Path;
use std::sync::Arc;

/// A point in `R^d`, `d` in 1..=4.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() || coords.len() > 4 {
            return Err(GeometryError::BadDimension(coords.len()));
        }
        Ok(Point { coords })
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point { coords: vec![x, y] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A 2D line segment with positive length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub(crate) data: SegData,
}

impl Segment {
    pub fn new(x1: [f64; 2], x2: [f64; 2]) -> Result<Self, GeometryError> {
        let len = ((x2[0] - x1[0]).powi(2) + (x2[1] - x1[1]).powi(2)).sqrt();
        if len == 0.0 {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Segment {
            data: SegData {
                x1,
                x2,
                len,
                mid: [(x1[0] + x2[0]) / 2.0, (x1[1] + x2[1]) / 2.0],
            },
        })
    }

    pub fn length(&self) -> f64 {
        self.data.len
    }

    pub fn midpoint(&self) -> [f64; 2] {
        self.data.mid
    }

    pub fn start(&self) -> [f64; 2] {
        self.data.x1
    }

    pub fn end(&self) -> [f64; 2] {
        self.data.x2
    }
}

/// Vertex loops: outer loop counterclockwise, inner loops clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    loops: Vec<Vec<[f64; 2]>>,
}

fn signed_area(lp: &[[f64; 2]]) -> f64 {
    let n = lp.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = lp[i];
        let q = lp[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    a / 2.0
}

impl Polygon {
    /// Validates loop sizes, distinct consecutive vertices, and orientation
    /// from the signed area (outer CCW, inner CW); orientation is checked
    /// rather than trusted because the MVP weight changes sign with it.
    pub fn new(loops: Vec<Vec<[f64; 2]>>) -> Result<Self, GeometryError> {
        if loops.is_empty() {
            return Err(GeometryError::TooFewVertices { loop_index: 0, got: 0 });
        }
        for (li, lp) in loops.iter().enumerate() {
            if lp.len() < 3 {
                return Err(GeometryError::TooFewVertices { loop_index: li, got: lp.len() });
            }
            for i in 0..lp.len() {
                if lp[i] == lp[(i + 1) % lp.len()] {
                    return Err(GeometryError::RepeatedVertex { loop_index: li, vertex: i });
                }
            }
            let area = signed_area(lp);
            let want_ccw = li == 0;
            if (area > 0.0) != want_ccw {
                return Err(GeometryError::BadOrientation { loop_index: li });
            }
        }
        Ok(Polygon { loops })
    }

    /// Convenience constructor for a single counterclockwise loop.
    pub fn simple(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        Polygon::new(vec![vertices])
    }

    pub fn loops(&self) -> &[Vec<[f64; 2]>] {
        &self.loops
    }

    /// Every edge of every loop.
    pub fn edges(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for lp in &self.loops {
            for i in 0..lp.len() {
                // validated loops cannot produce degenerate edges
                out.push(Segment::new(lp[i], lp[(i + 1) % lp.len()]).unwrap());
            }
        }
        out
    }

    /// Largest extent of the outer loop's bounding box.
    pub fn diameter(&self) -> f64 {
        let outer = &self.loops[0];
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in outer {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    /// Parse the plain-text polygon format: one vertex per line as two
    /// whitespace-separated decimals, loops separated by a blank line,
    /// outer loop first.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut loops: Vec<Vec<[f64; 2]>> = Vec::new();
        let mut current: Vec<[f64; 2]> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                if !current.is_empty() {
                    loops.push(std::mem::take(&mut current));
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64, GeometryError> {
                s.and_then(|t| t.parse::<f64>().ok())
                    .ok_or(GeometryError::PolygonParse { line: ln + 1, content: raw.to_string() })
            };
            let x = parse(parts.next())?;
            let y = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(GeometryError::PolygonParse { line: ln + 1, content: raw.to_string() });
            }
            current.push([x, y]);
        }
        if !current.is_empty() {
            loops.push(current);
        }
        Polygon::new(loops)
    }

    pub fn from_path(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::PolygonIo(format!("{}: {e}", path.display())))?;
        Polygon::parse(&text)
    }
}

/// A parametric boundary curve `c(t)`, `t` in `[0,1]`, with tangent `c'(t)`.
pub struct ParametricCurve {
    sampler: Box<dyn Fn(f64) -> ([f64; 2], [f64; 2]) + Send + Sync>,
    closed: bool,
}

impl ParametricCurve {
    pub fn new<F>(sampler: F, closed: bool) -> Result<Self, GeometryError>
    where
        F: Fn(f64) -> ([f64; 2], [f64; 2]) + Send + Sync + 'static,
    {
        if closed {
            let (c0, _) = sampler(0.0);
            let (c1, _) = sampler(1.0);
            let gap = ((c1[0] - c0[0]).powi(2) + (c1[1] - c0[1]).powi(2)).sqrt();
            if gap > 1e-9 {
                return Err(GeometryError::CurveNotClosed);
            }
        }
        for k in 0..=64 {
            let t = k as f64 / 64.0;
            let (_, d) = sampler(t);
            if (d[0] * d[0] + d[1] * d[1]).sqrt() == 0.0 {
                return Err(GeometryError::CurveTangentVanishes(t));
            }
        }
        Ok(ParametricCurve { sampler: Box::new(sampler), closed })
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        let tau = std::f64::consts::TAU;
        ParametricCurve::new(
            move |t| {
                let ang = tau * t;
                ([a * ang.cos(), b * ang.sin()], [-a * tau * ang.sin(), b * tau * ang.cos()])
            },
            true,
        )
        .unwrap()
    }

    pub fn at(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        (self.sampler)(t)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

/// Which ADF construction a benchmark uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdfMethod {
    /// R-equivalence join of piece ADFs.
    Req,
    /// Mean-value potential.
    Mvp,
    /// Exact distance composition (valid when the medial axis is outside
    /// the computational domain, e.g. an annulus).
    Exact,
    /// Plain product of piece ADFs.
    Product,
}

/// ADF construction parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdfConfig {
    pub method: AdfMethod,
    /// R-equivalence normalization order.
    pub m: i32,
    /// MVP exponent.
    pub p: i32,
    /// Gauss-Legendre panels for curve potentials.
    pub quadrature_points: usize,
}

impl Default for AdfConfig {
    fn default() -> Self {
        AdfConfig { method: AdfMethod::Req, m: 1, p: 1, quadrature_points: 256 }
    }
}

impl AdfConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.m < 1 {
            return Err(GeometryError::ReqOrderTooLow(self.m));
        }
        if self.p < 1 {
            return Err(GeometryError::MvpExponentTooLow(self.p));
        }
        if self.quadrature_points < 16 {
            return Err(GeometryError::TooFewQuadraturePoints {
                min: 16,
                got: self.quadrature_points,
            });
        }
        Ok(())
    }
}

/// Signed distance to the infinite line through a segment; zero on the
/// line, linear, positive on its left.
pub fn line_signed_distance(seg: &Segment) -> Field {
    Field::new(Node::LineSigned(seg.data))
}

/// Trimming disk function: positive inside the disk of radius `L/2`
/// centered at the segment midpoint, zero on its circle.
pub fn trim_function(seg: &Segment) -> Field {
    Field::new(Node::Trim(seg.data))
}

/// First-order normalized ADF to a segment; zero exactly on the segment,
/// `C^2` away from it.
pub fn segment_adf(seg: &Segment) -> Field {
    Field::new(Node::SegmentAdf(seg.data))
}

/// ADF to a circle/sphere: positive inside, `|grad| = 1` on the boundary.
pub fn circle_adf(center: &Point, radius: f64) -> Result<Field, GeometryError> {
    if radius <= 0.0 {
        return Err(GeometryError::NonPositiveRadius(radius));
    }
    Ok(Field::new(Node::CircleAdf { center: center.coords.clone(), radius }))
}

/// Normalize a field to first order: `w / sqrt(w^2 + |grad w|^2)`.
/// Preserves the zero set and makes the boundary normal derivative 1.
pub fn first_order_normalize(omega: &Field) -> Field {
    Field::new(Node::Normalize1(omega.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RKind {
    Disjunction,
    Conjunction,
}

/// Parametric R-function pair; `alpha = 1` recovers pointwise max/min.
pub fn r_alpha_pair(
    w1: &Field,
    w2: &Field,
    alpha: f64,
    kind: RKind,
) -> Result<Field, GeometryError> {
    if !(alpha > -1.0 && alpha <= 1.0) {
        return Err(GeometryError::AlphaOutOfRange(alpha));
    }
    Ok(Field::new(Node::RAlpha {
        a: w1.clone(),
        b: w2.clone(),
        alpha,
        union: kind == RKind::Disjunction,
    }))
}

/// `C^s` R-function pair.
pub fn r_s_pair(w1: &Field, w2: &Field, s: i32, kind: RKind) -> Result<Field, GeometryError> {
    if s < 1 {
        return Err(GeometryError::SmoothnessTooLow(s));
    }
    Ok(Field::new(Node::RS {
        a: w1.clone(),
        b: w2.clone(),
        s,
        union: kind == RKind::Disjunction,
    }))
}

/// Join nonnegative piece ADFs preserving m-th order normalization:
/// `1 / (sum phi_i^-m)^(1/m)`. Associative and symmetric; a zero input
/// yields exactly zero.
pub fn r_equivalence_join(fields: &[Field], m: i32) -> Result<Field, GeometryError> {
    if m < 1 {
        return Err(GeometryError::ReqOrderTooLow(m));
    }
    Ok(Field::new(Node::ReqJoin { parts: fields.to_vec(), m }))
}

/// R-conjunction join `phi1 + phi2 - (phi1^s + phi2^s)^(1/s)`, normalized
/// to order `s - 1`. Not associative.
pub fn r_conjunction_join(w1: &Field, w2: &Field, s: i32) -> Result<Field, GeometryError> {
    if s < 2 {
        return Err(GeometryError::ConjunctionOrderTooLow(s));
    }
    Ok(Field::new(Node::RConj { a: w1.clone(), b: w2.clone(), s }))
}

/// ADF to a polygon boundary: R-equivalence join of all edge ADFs.
pub fn polygon_adf_req(poly: &Polygon, m: i32) -> Result<Field, GeometryError> {
    let parts: Vec<Field> = poly.edges().iter().map(segment_adf).collect();
    r_equivalence_join(&parts, m)
}

/// Mean-value weight `W(x)`; positive inside, singular on the boundary.
pub fn mvp_polygon_weight(poly: &Polygon) -> Field {
    Field::new(Node::MvpPolyWeight { loops: Arc::new(poly.loops.clone()) })
}

/// Relative boundary clamp width for MVP fields.
pub const MVP_EPS_REL: f64 = 1e-9;

/// MVP polygon ADF `2 / W(x)`, exactly zero within the boundary clamp.
pub fn mvp_polygon_adf(poly: &Polygon) -> Field {
    let eps = MVP_EPS_REL * poly.diameter();
    Field::new(Node::MvpPolyAdf { loops: Arc::new(poly.loops.clone()), eps })
}

/// MVP ADF to a closed parametric curve via the `L_p` potential
/// `W_p(x) = int ((c(t)-x) . rot(c'(t))) / |c(t)-x|^(2+p) dt`,
/// integrated by composite 2-point Gauss-Legendre over `nq` panels.
pub fn mvp_curve_adf(
    curve: &ParametricCurve,
    p: i32,
    nq: usize,
) -> Result<Field, GeometryError> {
    if p < 1 {
        return Err(GeometryError::MvpExponentTooLow(p));
    }
    if nq < 16 {
        return Err(GeometryError::TooFewQuadraturePoints { min: 16, got: nq });
    }
    if !curve.closed {
        return Err(GeometryError::CurveNotClosed);
    }
    // 2-point Gauss rule per panel
    let g = 1.0 / 3.0f64.sqrt();
    let mut nodes = Vec::with_capacity(2 * nq);
    let h = 1.0 / nq as f64;
    for k in 0..nq {
        let mid = (k as f64 + 0.5) * h;
        for s in [-g, g] {
            let t = mid + 0.5 * h * s;
            let (pos, d) = curve.at(t);
            // clockwise rotation of the tangent, scaled by the weight h/2
            nodes.push(CurveNode { pos, perp_w: [d[1] * 0.5 * h, -d[0] * 0.5 * h] });
        }
    }
    let mut polyline: Vec<[f64; 2]> = Vec::with_capacity(4 * nq);
    let mut diam: f64 = 0.0;
    for k in 0..(4 * nq) {
        let (pos, _) = curve.at(k as f64 / (4 * nq) as f64);
        polyline.push(pos);
    }
    for a in polyline.iter() {
        for b in polyline.iter() {
            diam = diam.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
    }
    Ok(Field::new(Node::MvpCurveAdf {
        nodes: Arc::new(nodes),
        polyline: Arc::new(polyline),
        p,
        eps: MVP_EPS_REL * diam,
    }))
}

/// Inverse-distance transfinite interpolant of per-piece boundary data:
/// matches `data_i` exactly on the zero set of `adf_i`; with `mu = 2` it
/// also matches the normal derivative there. Weights form a partition of
/// unity. Where two zero sets intersect the lowest-index piece wins.
pub fn transfinite_interpolant(
    pieces: &[(Field, Field, i32)],
) -> Result<Field, GeometryError> {
    if pieces.is_empty() {
        return Err(GeometryError::EmptyTransfinite);
    }
    for (_, _, mu) in pieces {
        if *mu < 1 {
            return Err(GeometryError::TransfiniteExponentTooLow(*mu));
        }
    }
    Ok(Field::new(Node::Transfinite { pieces: pieces.to_vec() }))
}

/// ADF to the boundary of the biunit hypercube `(-1,1)^d`: R-equivalence
/// join of the slab ADFs `(1 - x_i^2)/2`.
pub fn hypercube_adf(d: usize, m: i32) -> Result<Field, GeometryError> {
    if d == 0 || d > 4 {
        return Err(GeometryError::BadDimension(d));
    }
    let strips: Vec<Field> = (0..d)
        .map(|i| (Field::constant(1.0) - Field::coord(i) * Field::coord(i)).scale(0.5))
        .collect();
    r_equivalence_join(&strips, m)
}

/// `-grad(phi) . grad(v)`, the derivative operator along the outward
/// normal direction of `phi`'s zero set, as a field.
pub fn d1_field(phi: &Field, v: &Field) -> Field {
    Field::new(Node::D1 { phi: phi.clone(), v: v.clone() })
}

/// Distance from a point to the nearest polygon edge.
pub fn polygon_boundary_distance(poly: &Polygon, p: [f64; 2]) -> f64 {
    crate::field::dist_to_loops(&poly.loops, p)
}
