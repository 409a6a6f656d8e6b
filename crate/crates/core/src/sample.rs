//! Domains, collocation sampling, and boundary sampling.

use crate::error::SolverError;
use crate::field::Field;
use crate::geometry::Polygon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Supported computational domains with analytic measures.
#[derive(Clone, Debug)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Poly(Polygon),
    Disk { center: [f64; 2], r: f64 },
    Annulus { r_inner: f64, r_outer: f64 },
    /// The biunit hypercube `(-1,1)^d`.
    Hypercube { d: usize },
}

/// One boundary piece with uniform samples and its analytic measure.
#[derive(Clone, Debug)]
pub struct PieceSamples {
    pub piece: usize,
    pub points: Vec<Vec<f64>>,
    pub measure: f64,
}

/// Interior and boundary collocation points.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub interior: Vec<Vec<f64>>,
    pub boundary: Vec<PieceSamples>,
}

/// Interior sampling strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Grid,
    UniformRandom,
    Halton,
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rect { .. } | Domain::Poly(_) | Domain::Disk { .. } | Domain::Annulus { .. } => 2,
            Domain::Hypercube { d } => *d,
        }
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { a, b } => (vec![*a], vec![*b]),
            Domain::Rect { lo, hi } => (lo.to_vec(), hi.to_vec()),
            Domain::Poly(p) => {
                let outer = &p.loops()[0];
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in outer {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo.to_vec(), hi.to_vec())
            }
            Domain::Disk { center, r } => {
                (vec![center[0] - r, center[1] - r], vec![center[0] + r, center[1] + r])
            }
            Domain::Annulus { r_outer, .. } => {
                (vec![-r_outer, -r_outer], vec![*r_outer, *r_outer])
            }
            Domain::Hypercube { d } => (vec![-1.0; *d], vec![1.0; *d]),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Rect { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Domain::Poly(p) => {
                // shoelace; inner loops are clockwise so they subtract
                p.loops()
                    .iter()
                    .map(|lp| {
                        let n = lp.len();
                        (0..n)
                            .map(|i| {
                                let a = lp[i];
                                let b = lp[(i + 1) % n];
                                a[0] * b[1] - b[0] * a[1]
                            })
                            .sum::<f64>()
                            / 2.0
                    })
                    .sum()
            }
            Domain::Disk { r, .. } => std::f64::consts::PI * r * r,
            Domain::Annulus { r_inner, r_outer } => {
                std::f64::consts::PI * (r_outer * r_outer - r_inner * r_inner)
            }
            Domain::Hypercube { d } => 2f64.powi(*d as i32),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Interval { a, b } => x[0] > *a && x[0] < *b,
            Domain::Rect { lo, hi } => (0..2).all(|k| x[k] > lo[k] && x[k] < hi[k]),
            Domain::Poly(p) => {
                // even-odd rule over all loops
                let mut inside = false;
                for lp in p.loops() {
                    let n = lp.len();
                    for i in 0..n {
                        let a = lp[i];
                        let b = lp[(i + 1) % n];
                        if (a[1] > x[1]) != (b[1] > x[1]) {
                            let t = (x[1] - a[1]) / (b[1] - a[1]);
                            if x[0] < a[0] + t * (b[0] - a[0]) {
                                inside = !inside;
                            }
                        }
                    }
                }
                inside
            }
            Domain::Disk { center, r } => {
                ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt() < *r
            }
            Domain::Annulus { r_inner, r_outer } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                r > *r_inner && r < *r_outer
            }
            Domain::Hypercube { d } => (0..*d).all(|k| x[k].abs() < 1.0),
        }
    }

    /// Closed-domain membership (boundary included) for evaluation grids.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        let tol = 1e-12;
        match self {
            Domain::Interval { a, b } => x[0] >= a - tol && x[0] <= b + tol,
            Domain::Rect { lo, hi } => {
                (0..2).all(|k| x[k] >= lo[k] - tol && x[k] <= hi[k] + tol)
            }
            Domain::Poly(p) => {
                self.contains(x)
                    || crate::field::dist_to_loops(p.loops(), [x[0], x[1]]) <= tol
            }
            Domain::Disk { center, r } => {
                ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt() <= r + tol
            }
            Domain::Annulus { r_inner, r_outer } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                r >= r_inner - tol && r <= r_outer + tol
            }
            Domain::Hypercube { d } => (0..*d).all(|k| x[k].abs() <= 1.0 + tol),
        }
    }

    /// Corner/vertex locations where ADF Laplacians are singular.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Domain::Interval { a, b } => vec![vec![*a], vec![*b]],
            Domain::Rect { lo, hi } => vec![
                vec![lo[0], lo[1]],
                vec![hi[0], lo[1]],
                vec![hi[0], hi[1]],
                vec![lo[0], hi[1]],
            ],
            Domain::Poly(p) => p
                .loops()
                .iter()
                .flat_map(|lp| lp.iter().map(|v| v.to_vec()))
                .collect(),
            Domain::Disk { .. } | Domain::Annulus { .. } => vec![],
            Domain::Hypercube { d } => {
                let mut out = Vec::with_capacity(1 << d);
                for mask in 0..(1usize << d) {
                    out.push(
                        (0..*d)
                            .map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 })
                            .collect(),
                    );
                }
                out
            }
        }
    }

    /// Uniform, deterministic boundary samples grouped by piece.
    /// Pieces are: interval endpoints, rectangle/polygon edges, circles
    /// (outer then inner for the annulus), hypercube faces.
    pub fn sample_boundary(&self, n_total: usize) -> Vec<PieceSamples> {
        match self {
            Domain::Interval { a, b } => vec![
                PieceSamples { piece: 0, points: vec![vec![*a]], measure: 1.0 },
                PieceSamples { piece: 1, points: vec![vec![*b]], measure: 1.0 },
            ],
            Domain::Rect { lo, hi } => {
                let corners =
                    [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
                edges_pieces(&corners, n_total)
            }
            Domain::Poly(p) => {
                let mut out = Vec::new();
                let mut piece = 0;
                let total_len: f64 = p
                    .loops()
                    .iter()
                    .flat_map(|lp| {
                        (0..lp.len()).map(move |i| edge_len(lp[i], lp[(i + 1) % lp.len()]))
                    })
                    .sum();
                for lp in p.loops() {
                    let n = lp.len();
                    for i in 0..n {
                        let (a, b) = (lp[i], lp[(i + 1) % n]);
                        let len = edge_len(a, b);
                        let ns = ((n_total as f64 * len / total_len).round() as usize).max(2);
                        let points = (0..ns)
                            .map(|k| {
                                let t = (k as f64 + 0.5) / ns as f64;
                                vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                            })
                            .collect();
                        out.push(PieceSamples { piece, points, measure: len });
                        piece += 1;
                    }
                }
                out
            }
            Domain::Disk { center, r } => {
                let points = (0..n_total.max(4))
                    .map(|k| {
                        let ang = std::f64::consts::TAU * (k as f64 + 0.5) / n_total.max(4) as f64;
                        vec![center[0] + r * ang.cos(), center[1] + r * ang.sin()]
                    })
                    .collect();
                vec![PieceSamples {
                    piece: 0,
                    points,
                    measure: std::f64::consts::TAU * r,
                }]
            }
            Domain::Annulus { r_inner, r_outer } => {
                let circ = |r: f64, n: usize, piece: usize| PieceSamples {
                    piece,
                    points: (0..n)
                        .map(|k| {
                            let ang = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                            vec![r * ang.cos(), r * ang.sin()]
                        })
                        .collect(),
                    measure: std::f64::consts::TAU * r,
                };
                let n_out = ((n_total as f64 * r_outer / (r_outer + r_inner)).round() as usize)
                    .max(4);
                let n_in = (n_total - n_out.min(n_total)).max(4);
                vec![circ(*r_outer, n_out, 0), circ(*r_inner, n_in, 1)]
            }
            Domain::Hypercube { d } => {
                let faces = 2 * d;
                let per_face = (n_total / faces).max(1);
                let mut rng = ChaCha8Rng::seed_from_u64(0x6f61_7263);
                let mut out = Vec::with_capacity(faces);
                for f in 0..faces {
                    let axis = f / 2;
                    let side = if f % 2 == 0 { -1.0 } else { 1.0 };
                    let points = (0..per_face)
                        .map(|_| {
                            (0..*d)
                                .map(|k| {
                                    if k == axis {
                                        side
                                    } else {
                                        rng.gen_range(-1.0..1.0)
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    out.push(PieceSamples {
                        piece: f,
                        points,
                        measure: 2f64.powi(*d as i32 - 1),
                    });
                }
                out
            }
        }
    }
}

fn edge_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

fn edges_pieces(corners: &[[f64; 2]; 4], n_total: usize) -> Vec<PieceSamples> {
    let per = (n_total / 4).max(2);
    (0..4)
        .map(|e| {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            PieceSamples {
                piece: e,
                points: (0..per)
                    .map(|k| {
                        let t = (k as f64 + 0.5) / per as f64;
                        vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                    })
                    .collect(),
                measure: edge_len(a, b),
            }
        })
        .collect()
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn far_from_vertices(domain: &Domain, x: &[f64], delta: f64) -> bool {
    domain.vertices().iter().all(|v| {
        let d2: f64 = v.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        d2.sqrt() >= delta
    })
}

/// Deterministic interior collocation points.
///
/// Accepted points are strictly inside (positive ADF when one is given),
/// and at least `delta_margin` from every domain vertex. The grid strategy
/// shrinks the bounding box by `delta_margin` so boxes reproduce the
/// `[delta, 1-delta]^d` layout exactly.
pub fn sample_interior(
    domain: &Domain,
    n: usize,
    strategy: Strategy,
    delta_margin: f64,
    seed: u64,
    adf: Option<&Field>,
) -> Result<Vec<Vec<f64>>, SolverError> {
    if n == 0 {
        return Err(SolverError::SamplingFailed { requested: 0, margin: delta_margin });
    }
    let d = domain.dim();
    let (lo, hi) = domain.bbox();
    let accept = |x: &[f64]| -> bool {
        if !domain.contains(x) {
            return false;
        }
        if let Some(phi) = adf {
            if phi.eval(x) <= 0.0 {
                return false;
            }
        }
        far_from_vertices(domain, x, delta_margin)
    };
    let mut out = Vec::with_capacity(n);
    match strategy {
        Strategy::Grid => {
            // successively finer grids in the margin-shrunk box until n
            // points are accepted
            let mut per_axis = (n as f64).powf(1.0 / d as f64).ceil() as usize;
            loop {
                out.clear();
                'fill: for idx in 0..per_axis.pow(d as u32) {
                    let mut rem = idx;
                    let mut x = vec![0.0; d];
                    for k in 0..d {
                        let i = rem % per_axis;
                        rem /= per_axis;
                        let a = lo[k] + delta_margin;
                        let b = hi[k] - delta_margin;
                        x[k] = if per_axis == 1 {
                            (a + b) / 2.0
                        } else {
                            a + (b - a) * i as f64 / (per_axis - 1) as f64
                        };
                    }
                    if accept(&x) {
                        out.push(x);
                        if out.len() == n {
                            break 'fill;
                        }
                    }
                }
                if out.len() >= n {
                    break;
                }
                per_axis += 1 + per_axis / 4;
                if per_axis > 4096 {
                    return Err(SolverError::SamplingFailed {
                        requested: n,
                        margin: delta_margin,
                    });
                }
            }
        }
        Strategy::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut attempts = 0usize;
            while out.len() < n {
                let x: Vec<f64> =
                    (0..d).map(|k| rng.gen_range(lo[k]..hi[k])).collect();
                if accept(&x) {
                    out.push(x);
                }
                attempts += 1;
                if attempts > 10_000 * n.max(100) {
                    return Err(SolverError::SamplingFailed {
                        requested: n,
                        margin: delta_margin,
                    });
                }
            }
        }
        Strategy::Halton => {
            const BASES: [usize; 4] = [2, 3, 5, 7];
            let mut idx = seed as usize % 1000 + 1; // deterministic offset
            let mut attempts = 0usize;
            while out.len() < n {
                let x: Vec<f64> = (0..d)
                    .map(|k| lo[k] + (hi[k] - lo[k]) * halton(idx, BASES[k]))
                    .collect();
                idx += 1;
                if accept(&x) {
                    out.push(x);
                }
                attempts += 1;
                if attempts > 10_000 * n.max(100) {
                    return Err(SolverError::SamplingFailed {
                        requested: n,
                        margin: delta_margin,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Tensor evaluation grid over the domain bounding box, restricted to the
/// domain; `per_axis` points per axis.
pub fn eval_grid(domain: &Domain, per_axis: usize) -> Vec<Vec<f64>> {
    let d = domain.dim();
    let (lo, hi) = domain.bbox();
    let mut out = Vec::new();
    let total = per_axis.pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut x = vec![0.0; d];
        for k in 0..d {
            let i = rem % per_axis;
            rem /= per_axis;
            x[k] = lo[k] + (hi[k] - lo[k]) * i as f64 / (per_axis - 1) as f64;
        }
        if domain.contains_closed(&x) {
            out.push(x);
        }
    }
    out
}
