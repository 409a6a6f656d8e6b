//! The batched, deterministic training loop.
//!
//! Points are processed in fixed blocks of 128; blocks may run on any
//! number of threads and are reduced in index order, so traces are
//! bit-identical across thread counts. Residual assembly and its adjoint
//! are written against the derivative-table layout of [`super::compile`];
//! the fastjet backward pass turns table adjoints into parameter
//! gradients.

use super::compile::{
    compile, BoundaryKind, CompiledLoss, CompiledOp, CompiledProblem, GeoTable, LossSpec,
    PlanKind, Q, QB, QG, QH, QLEN, QT, QV, QXY,
};
use crate::error::SolverError;
use crate::field::Field;
use crate::net::fastjet::{JetNet, Real};
use crate::net::{adam_step, AdamState, Network};
use crate::sample::PointSet;
use crate::structures::Ansatz;
use rayon::prelude::*;

const BLOCK: usize = 128;

/// Arithmetic precision of the training loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub precision: Precision,
    /// Evaluate the normalized error every this many epochs (plus the
    /// final epoch); the loss is recorded every epoch.
    pub error_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            lr: 1e-3,
            seed: 0,
            precision: Precision::F64,
            error_every: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub loss: f64,
    pub normalized_error: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
}

impl TrainTrace {
    pub fn final_loss(&self) -> f64 {
        self.rows.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.normalized_error)
    }
}

/// Dense evaluation grid with optional exact values.
#[derive(Clone, Debug)]
pub struct EvalGrid {
    pub points: Vec<Vec<f64>>,
    pub exact: Option<Vec<f64>>,
}

// ---------------------------------------------------------------------
// residual assembly over derivative tables
// ---------------------------------------------------------------------

#[inline]
fn qr<R: Real>(q: &Q<f64>, i: usize) -> R {
    R::from_f64(q[i])
}

/// Laplacian of one net term `b N (+ c . grad N)`.
#[inline]
fn lap_term<R: Real>(dim: usize, b: &Q<f64>, c: Option<&[Q<f64>]>, n: &Q<R>) -> R {
    let mut blap = b[QH];
    for k in 1..dim {
        blap += b[QH + k];
    }
    let mut acc = n[QV].scale_r(blap);
    for m in 0..dim {
        acc += n[QG + m].scale_r(2.0 * b[QG + m]);
        acc += qr::<R>(b, QV) * n[QH + m];
    }
    if let Some(cs) = c {
        debug_assert!(dim <= 2);
        for (j, cj) in cs.iter().enumerate() {
            let mut clap = cj[QH];
            for k in 1..dim {
                clap += cj[QH + k];
            }
            acc += n[QG + j].scale_r(clap);
            if dim == 1 {
                acc += n[QH].scale_r(2.0 * cj[QG]);
                acc += qr::<R>(cj, QV) * n[QT];
            } else {
                let (r0, r1) = if j == 0 { (QH, QXY) } else { (QXY, QH + 1) };
                acc += n[r0].scale_r(2.0 * cj[QG]);
                acc += n[r1].scale_r(2.0 * cj[QG + 1]);
                let lg = if j == 0 { n[QT] + n[QT + 2] } else { n[QT + 1] + n[QT + 3] };
                acc += qr::<R>(cj, QV) * lg;
            }
        }
    }
    acc
}

#[inline]
fn lap_term_adj<R: Real>(
    dim: usize,
    b: &Q<f64>,
    c: Option<&[Q<f64>]>,
    rbar: R,
    nbar: &mut Q<R>,
) {
    let mut blap = b[QH];
    for k in 1..dim {
        blap += b[QH + k];
    }
    nbar[QV] += rbar.scale_r(blap);
    for m in 0..dim {
        nbar[QG + m] += rbar.scale_r(2.0 * b[QG + m]);
        nbar[QH + m] += rbar * qr::<R>(b, QV);
    }
    if let Some(cs) = c {
        for (j, cj) in cs.iter().enumerate() {
            let mut clap = cj[QH];
            for k in 1..dim {
                clap += cj[QH + k];
            }
            nbar[QG + j] += rbar.scale_r(clap);
            if dim == 1 {
                nbar[QH] += rbar.scale_r(2.0 * cj[QG]);
                nbar[QT] += rbar * qr::<R>(cj, QV);
            } else {
                let (r0, r1) = if j == 0 { (QH, QXY) } else { (QXY, QH + 1) };
                nbar[r0] += rbar.scale_r(2.0 * cj[QG]);
                nbar[r1] += rbar.scale_r(2.0 * cj[QG + 1]);
                let cv = rbar * qr::<R>(cj, QV);
                if j == 0 {
                    nbar[QT] += cv;
                    nbar[QT + 2] += cv;
                } else {
                    nbar[QT + 1] += cv;
                    nbar[QT + 3] += cv;
                }
            }
        }
    }
}

/// First derivative along coordinate `i` of one net term.
#[inline]
fn grad_term<R: Real>(dim: usize, i: usize, b: &Q<f64>, c: Option<&[Q<f64>]>, n: &Q<R>) -> R {
    let mut acc = n[QV].scale_r(b[QG + i]) + qr::<R>(b, QV) * n[QG + i];
    if let Some(cs) = c {
        for (j, cj) in cs.iter().enumerate() {
            acc += n[QG + j].scale_r(cj[QG + i]);
            let h = if dim == 1 {
                QH
            } else if i == j {
                QH + i
            } else {
                QXY
            };
            acc += qr::<R>(cj, QV) * n[h];
        }
    }
    acc
}

#[inline]
fn grad_term_adj<R: Real>(
    dim: usize,
    i: usize,
    b: &Q<f64>,
    c: Option<&[Q<f64>]>,
    rbar: R,
    nbar: &mut Q<R>,
) {
    nbar[QV] += rbar.scale_r(b[QG + i]);
    nbar[QG + i] += rbar * qr::<R>(b, QV);
    if let Some(cs) = c {
        for (j, cj) in cs.iter().enumerate() {
            nbar[QG + j] += rbar.scale_r(cj[QG + i]);
            let h = if dim == 1 {
                QH
            } else if i == j {
                QH + i
            } else {
                QXY
            };
            nbar[h] += rbar * qr::<R>(cj, QV);
        }
    }
}

#[inline]
fn value_term<R: Real>(b: &Q<f64>, c: Option<&[Q<f64>]>, n: &Q<R>) -> R {
    let mut acc = qr::<R>(b, QV) * n[QV];
    if let Some(cs) = c {
        for (j, cj) in cs.iter().enumerate() {
            acc += qr::<R>(cj, QV) * n[QG + j];
        }
    }
    acc
}

#[inline]
fn value_term_adj<R: Real>(b: &Q<f64>, c: Option<&[Q<f64>]>, rbar: R, nbar: &mut Q<R>) {
    nbar[QV] += rbar * qr::<R>(b, QV);
    if let Some(cs) = c {
        for (j, cj) in cs.iter().enumerate() {
            nbar[QG + j] += rbar * qr::<R>(cj, QV);
        }
    }
}

/// Biharmonic of one net term (no gradient coupling):
/// `b bih(N) + N bih(b) + 2 lap(b) lap(N) + 4 grad(b).grad(lap N)
///  + 4 grad(N).grad(lap b) + 4 <Hess b, Hess N>`.
#[inline]
fn bih_term<R: Real>(dim: usize, b: &Q<f64>, n: &Q<R>) -> R {
    let mut blap = b[QH];
    let mut nlap = n[QH];
    for k in 1..dim {
        blap += b[QH + k];
        nlap += n[QH + k];
    }
    let mut acc = qr::<R>(b, QV) * n[QB] + n[QV].scale_r(b[QB]) + nlap.scale_r(2.0 * blap);
    if dim == 1 {
        acc += n[QT].scale_r(4.0 * b[QG]);
        acc += n[QG].scale_r(4.0 * b[QT]);
        acc += n[QH].scale_r(4.0 * b[QH]);
    } else {
        let blg = [b[QT] + b[QT + 2], b[QT + 1] + b[QT + 3]];
        let nlg = [n[QT] + n[QT + 2], n[QT + 1] + n[QT + 3]];
        for j in 0..2 {
            acc += nlg[j].scale_r(4.0 * b[QG + j]);
            acc += n[QG + j].scale_r(4.0 * blg[j]);
        }
        acc += n[QH].scale_r(4.0 * b[QH])
            + n[QH + 1].scale_r(4.0 * b[QH + 1])
            + n[QXY].scale_r(8.0 * b[QXY]);
    }
    acc
}

#[inline]
fn bih_term_adj<R: Real>(dim: usize, b: &Q<f64>, rbar: R, nbar: &mut Q<R>) {
    let mut blap = b[QH];
    for k in 1..dim {
        blap += b[QH + k];
    }
    nbar[QB] += rbar * qr::<R>(b, QV);
    nbar[QV] += rbar.scale_r(b[QB]);
    for k in 0..dim {
        nbar[QH + k] += rbar.scale_r(2.0 * blap);
    }
    if dim == 1 {
        nbar[QT] += rbar.scale_r(4.0 * b[QG]);
        nbar[QG] += rbar.scale_r(4.0 * b[QT]);
        nbar[QH] += rbar.scale_r(4.0 * b[QH]);
    } else {
        let blg = [b[QT] + b[QT + 2], b[QT + 1] + b[QT + 3]];
        let g0 = rbar.scale_r(4.0 * b[QG]);
        nbar[QT] += g0;
        nbar[QT + 2] += g0;
        let g1 = rbar.scale_r(4.0 * b[QG + 1]);
        nbar[QT + 1] += g1;
        nbar[QT + 3] += g1;
        for j in 0..2 {
            nbar[QG + j] += rbar.scale_r(4.0 * blg[j]);
        }
        nbar[QH] += rbar.scale_r(4.0 * b[QH]);
        nbar[QH + 1] += rbar.scale_r(4.0 * b[QH + 1]);
        nbar[QXY] += rbar.scale_r(8.0 * b[QXY]);
    }
}

trait ScaleR: Real {
    #[inline]
    fn scale_r(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
}
impl<R: Real> ScaleR for R {}

#[inline]
fn sqrt_r<R: Real>(v: R) -> R {
    R::from_f64(v.to_f64().sqrt())
}

#[inline]
fn cs<'a>(geo: &'a GeoTable, k: usize, i: usize, dim: usize) -> Option<&'a [Q<f64>]> {
    if geo.c[k].is_empty() {
        None
    } else {
        Some(&geo.c[k][i * dim..(i + 1) * dim])
    }
}

/// `u(x_i)` from the value tables (used for boundary batches and grids).
fn value_at<R: Real>(geo: &GeoTable, dim: usize, n_nets: usize, i: usize, nq: &[Q<R>], frozen_k: R) -> R {
    let mut u = qr::<R>(&geo.a[i], QV);
    for k in 0..n_nets {
        u += value_term(&geo.b[k][i], cs(geo, k, i, dim), &nq[k]);
    }
    if !geo.frozen_coef.is_empty() {
        u += frozen_k.scale_r(geo.frozen_coef[i]);
    }
    u
}

/// Interior residual `OP(u) - f` at point `i`.
fn residual_at<R: Real>(
    p: &CompiledProblem,
    op: CompiledOp,
    i: usize,
    nq: &[Q<R>],
    frozen_k: R,
) -> R {
    let dim = p.dim;
    let a = &p.geo.a[i];
    let frozen = |r: R| -> R {
        if p.geo.frozen_coef.is_empty() {
            r
        } else {
            r + frozen_k.scale_r(p.geo.frozen_coef[i])
        }
    };
    match op {
        CompiledOp::NegLap => {
            let mut alap = a[QH];
            for k in 1..dim {
                alap += a[QH + k];
            }
            let mut lap = R::from_f64(alap);
            for k in 0..p.n_nets {
                lap += lap_term(dim, &p.geo.b[k][i], cs(&p.geo, k, i, dim), &nq[k]);
            }
            frozen(-lap - R::from_f64(p.geo.f[i]))
        }
        CompiledOp::AdvDiff { alpha } => {
            let mut upp = R::from_f64(a[QH]);
            let mut up = R::from_f64(a[QG]);
            for k in 0..p.n_nets {
                upp += lap_term(1, &p.geo.b[k][i], cs(&p.geo, k, i, 1), &nq[k]);
                up += grad_term(1, 0, &p.geo.b[k][i], cs(&p.geo, k, i, 1), &nq[k]);
            }
            frozen(upp - up.scale_r(alpha) - R::from_f64(p.geo.f[i]))
        }
        CompiledOp::Bih => {
            let mut bih = R::from_f64(a[QB]);
            for k in 0..p.n_nets {
                bih += bih_term(dim, &p.geo.b[k][i], &nq[k]);
            }
            frozen(bih - R::from_f64(p.geo.f[i]))
        }
        CompiledOp::Eik => {
            let mut norm2 = R::zero();
            for m in 0..dim {
                let mut g = R::from_f64(a[QG + m]);
                for k in 0..p.n_nets {
                    g += grad_term(dim, m, &p.geo.b[k][i], None, &nq[k]);
                }
                norm2 += g * g;
            }
            sqrt_r(norm2) - R::from_f64(p.geo.f[i])
        }
    }
}

fn residual_adj<R: Real>(
    p: &CompiledProblem,
    op: CompiledOp,
    i: usize,
    nq: &[Q<R>],
    rbar: R,
    nbar: &mut [Q<R>],
    frozen_kbar: &mut R,
) {
    let dim = p.dim;
    if !p.geo.frozen_coef.is_empty() && !matches!(op, CompiledOp::Eik) {
        *frozen_kbar += rbar.scale_r(p.geo.frozen_coef[i]);
    }
    match op {
        CompiledOp::NegLap => {
            for k in 0..p.n_nets {
                lap_term_adj(dim, &p.geo.b[k][i], cs(&p.geo, k, i, dim), -rbar, &mut nbar[k]);
            }
        }
        CompiledOp::AdvDiff { alpha } => {
            for k in 0..p.n_nets {
                lap_term_adj(1, &p.geo.b[k][i], cs(&p.geo, k, i, 1), rbar, &mut nbar[k]);
                grad_term_adj(
                    1,
                    0,
                    &p.geo.b[k][i],
                    cs(&p.geo, k, i, 1),
                    -rbar.scale_r(alpha),
                    &mut nbar[k],
                );
            }
        }
        CompiledOp::Bih => {
            for k in 0..p.n_nets {
                bih_term_adj(dim, &p.geo.b[k][i], rbar, &mut nbar[k]);
            }
        }
        CompiledOp::Eik => {
            let a = &p.geo.a[i];
            let mut g = [R::zero(); 4];
            let mut norm2 = R::zero();
            for m in 0..dim {
                let mut gm = R::from_f64(a[QG + m]);
                for k in 0..p.n_nets {
                    gm += grad_term(dim, m, &p.geo.b[k][i], None, &nq[k]);
                }
                g[m] = gm;
                norm2 += gm * gm;
            }
            let norm = sqrt_r(norm2).to_f64().max(1e-30);
            for m in 0..dim {
                let gbar = rbar * g[m].scale_r(1.0 / norm);
                for k in 0..p.n_nets {
                    grad_term_adj(dim, m, &p.geo.b[k][i], None, gbar, &mut nbar[k]);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------
// epoch loop
// ---------------------------------------------------------------------

struct BlockWs<R: Real> {
    jetnets: Vec<JetNet<R>>,
}

struct Engine<'a, R: Real> {
    p: &'a CompiledProblem,
    nets: &'a [Network],
    stride: usize,
    offsets: Vec<usize>,
    n_params: usize,
    _marker: std::marker::PhantomData<R>,
}

impl<'a, R: Real> Engine<'a, R> {
    fn new(p: &'a CompiledProblem, nets: &'a [Network]) -> Self {
        let mut offsets = Vec::with_capacity(nets.len() + 1);
        let mut off = 0;
        for n in nets {
            offsets.push(off);
            off += n.n_params();
        }
        offsets.push(off);
        Engine {
            p,
            nets,
            stride: p.plan.stride(),
            offsets,
            n_params: off,
            _marker: std::marker::PhantomData,
        }
    }

    fn make_ws(&self) -> BlockWs<R> {
        BlockWs {
            jetnets: self.nets.iter().map(|n| JetNet::new(n, &self.p.plan)).collect(),
        }
    }

    /// Forward all nets at stored input `i` of `inputs`, extract tables.
    fn forward_point(
        &self,
        ws: &mut BlockWs<R>,
        params: &[Vec<R>],
        inputs: &[R],
        i: usize,
        nq: &mut [Q<R>],
    ) {
        let isz = self.p.dim * self.stride;
        let input = &inputs[i * isz..(i + 1) * isz];
        for (k, jn) in ws.jetnets.iter_mut().enumerate() {
            let out = jn.forward(&params[k], input);
            nq[k] = self.p.kind.extract(out);
        }
    }

    /// Backward all nets with table adjoints (forward state must match).
    fn backward_point(
        &self,
        ws: &mut BlockWs<R>,
        params: &[Vec<R>],
        nbar: &[Q<R>],
        jetbar: &mut [R],
        grad: &mut [R],
    ) {
        for (k, jn) in ws.jetnets.iter_mut().enumerate() {
            for v in jetbar.iter_mut() {
                *v = R::zero();
            }
            self.p.kind.extract_adj(&nbar[k], jetbar);
            let g = &mut grad[self.offsets[k]..self.offsets[k + 1]];
            jn.backward(&params[k], jetbar, g);
        }
    }

    /// Frozen-trace value `K = alpha N(x_b) + beta . grad N(x_b)`.
    fn frozen_value(&self, ws: &mut BlockWs<R>, params: &[Vec<R>]) -> R {
        match &self.p.frozen {
            None => R::zero(),
            Some(fr) => {
                let input: Vec<R> = fr.input.iter().map(|&v| R::from_f64(v)).collect();
                let out = ws.jetnets[fr.net_index].forward(&params[fr.net_index], &input);
                let q = self.p.kind.extract(out);
                let mut k = q[QV].scale_r(fr.alpha);
                for (j, bj) in fr.beta.iter().enumerate() {
                    k += q[QG + j].scale_r(*bj);
                }
                k
            }
        }
    }

    fn frozen_backward(
        &self,
        ws: &mut BlockWs<R>,
        params: &[Vec<R>],
        kbar: R,
        jetbar: &mut [R],
        grad: &mut [R],
    ) {
        if let Some(fr) = &self.p.frozen {
            let _ = self.frozen_value(ws, params); // restore forward state
            let mut qbar = [R::zero(); QLEN];
            qbar[QV] = kbar.scale_r(fr.alpha);
            for (j, bj) in fr.beta.iter().enumerate() {
                qbar[QG + j] = kbar.scale_r(*bj);
            }
            for v in jetbar.iter_mut() {
                *v = R::zero();
            }
            self.p.kind.extract_adj(&qbar, jetbar);
            let g = &mut grad[self.offsets[fr.net_index]..self.offsets[fr.net_index + 1]];
            ws.jetnets[fr.net_index].backward(&params[fr.net_index], jetbar, g);
        }
    }
}

/// Concentrated work terms: `vc * u(p) + gc . grad u(p)`.
fn point_terms_pass<R: Real>(
    eng: &Engine<R>,
    ws: &mut BlockWs<R>,
    params: &[Vec<R>],
    frozen_k: R,
    grad: &mut [R],
    kbar: &mut R,
) -> f64 {
    let p = eng.p;
    let mut loss = 0.0f64;
    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
    let mut nbar = vec![[R::zero(); QLEN]; p.n_nets];
    let mut jetbar = vec![R::zero(); eng.stride];
    for term in &p.point_terms {
        let input: Vec<R> = term.input.iter().map(|&v| R::from_f64(v)).collect();
        for (k, jn) in ws.jetnets.iter_mut().enumerate() {
            let out = jn.forward(&params[k], &input);
            nq[k] = p.kind.extract(out);
        }
        let u = value_at(&term.geo, p.dim, p.n_nets, 0, &nq, frozen_k);
        let mut contrib = u.scale_r(term.value_coef);
        let mut gvals = [R::zero(); 4];
        for (i, gc) in term.grad_coef.iter().enumerate() {
            let mut g = qr::<R>(&term.geo.a[0], QG + i);
            for k in 0..p.n_nets {
                g += grad_term(p.dim, i, &term.geo.b[k][0], cs(&term.geo, k, 0, p.dim), &nq[k]);
            }
            gvals[i] = g;
            contrib += g.scale_r(*gc);
        }
        loss += contrib.to_f64();
        for q in nbar.iter_mut() {
            *q = [R::zero(); QLEN];
        }
        let ubar = R::from_f64(term.value_coef);
        for k in 0..p.n_nets {
            value_term_adj(&term.geo.b[k][0], cs(&term.geo, k, 0, p.dim), ubar, &mut nbar[k]);
        }
        for (i, gc) in term.grad_coef.iter().enumerate() {
            let gbar = R::from_f64(*gc);
            for k in 0..p.n_nets {
                grad_term_adj(p.dim, i, &term.geo.b[k][0], cs(&term.geo, k, 0, p.dim), gbar, &mut nbar[k]);
            }
        }
        if !term.geo.frozen_coef.is_empty() {
            *kbar += ubar.scale_r(term.geo.frozen_coef[0]);
        }
        let _ = gvals;
        eng.backward_point(ws, params, &nbar, &mut jetbar, grad);
    }
    loss
}

fn boundary_pass<R: Real>(
    eng: &Engine<R>,
    ws: &mut BlockWs<R>,
    params: &[Vec<R>],
    inputs_r: &[R],
    b: &super::compile::CompiledBoundary,
    weight: f64,
    frozen_k: R,
    grad: &mut [R],
    kbar: &mut R,
) -> f64 {
    let p = eng.p;
    let nb = b.n_points as f64;
    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
    let mut nbar = vec![[R::zero(); QLEN]; p.n_nets];
    let mut jetbar = vec![R::zero(); eng.stride];
    let mut loss = 0.0f64;
    for i in 0..b.n_points {
        eng.forward_point(ws, params, inputs_r, i, &mut nq);
        let u = value_at(&b.geo, p.dim, p.n_nets, i, &nq, frozen_k);
        let (contrib, ubar) = match &b.kind {
            BoundaryKind::Misfit { g } => {
                let miss = u - R::from_f64(g[i]);
                (
                    weight * miss.to_f64() * miss.to_f64() / nb,
                    miss.scale_r(2.0 * weight / nb),
                )
            }
            BoundaryKind::RobinEnergy { c, h, measure } => {
                let s = weight * measure / nb;
                let e = u * u.scale_r(0.5 * c[i]) - u.scale_r(h[i]);
                (s * e.to_f64(), (u.scale_r(c[i]) - R::from_f64(h[i])).scale_r(s))
            }
        };
        loss += contrib;
        for q in nbar.iter_mut() {
            *q = [R::zero(); QLEN];
        }
        for k in 0..p.n_nets {
            value_term_adj(&b.geo.b[k][i], cs(&b.geo, k, i, p.dim), ubar, &mut nbar[k]);
        }
        if !b.geo.frozen_coef.is_empty() {
            *kbar += ubar.scale_r(b.geo.frozen_coef[i]);
        }
        eng.backward_point(ws, params, &nbar, &mut jetbar, grad);
    }
    loss
}

struct EpochState<R: Real> {
    params: Vec<Vec<R>>,
    block_ws: Vec<BlockWs<R>>,
    block_grads: Vec<Vec<R>>,
    main_ws: BlockWs<R>,
    inputs_r: Vec<R>,
    boundary_inputs_r: Vec<Vec<R>>,
    /// per-point (u, grad u) storage for the Rayleigh two-pass
    rq_store: Vec<(R, R)>,
}

fn make_state<R: Real>(p: &CompiledProblem, eng: &Engine<R>, ansatz: &Ansatz) -> EpochState<R> {
    let n_blocks = p.n_points.div_ceil(BLOCK);
    EpochState::<R> {
        params: ansatz
            .nets
            .iter()
            .map(|n| n.params().iter().map(|&v| R::from_f64(v)).collect())
            .collect(),
        block_ws: (0..n_blocks).map(|_| eng.make_ws()).collect(),
        block_grads: vec![vec![R::zero(); eng.n_params]; n_blocks],
        main_ws: eng.make_ws(),
        inputs_r: p.inputs.iter().map(|&v| R::from_f64(v)).collect(),
        boundary_inputs_r: p
            .boundary
            .iter()
            .map(|b| b.inputs.iter().map(|&v| R::from_f64(v)).collect())
            .collect(),
        rq_store: if matches!(p.loss, CompiledLoss::Rayleigh) {
            vec![(R::zero(), R::zero()); p.n_points]
        } else {
            Vec::new()
        },
    }
}

/// One loss/gradient evaluation of the compiled problem at the current
/// parameters (diagnostics and cross-checks against the reference path).
pub fn loss_and_grad(
    ansatz: &Ansatz,
    loss: &LossSpec,
    points: &PointSet,
    forcing: &Field,
    domain_measure: f64,
) -> Result<(f64, Vec<f64>), SolverError> {
    let p = compile(ansatz, loss, points, forcing, domain_measure)?;
    let eng = Engine::<f64>::new(&p, &ansatz.nets);
    let mut st = make_state::<f64>(&p, &eng, ansatz);
    let mut grad = vec![0.0f64; eng.n_params];
    let l = epoch_pass(&eng, &mut st, &mut grad)?;
    Ok((l, grad))
}

fn run_training<R: Real>(
    p: &CompiledProblem,
    ansatz: &mut Ansatz,
    grid: Option<&GridData>,
    cfg: &TrainConfig,
) -> Result<TrainTrace, SolverError> {
    let eng = Engine::<R>::new(p, &ansatz.nets);
    let mut st = make_state::<R>(p, &eng, ansatz);
    let mut theta = ansatz.flat_params();
    let mut adam = AdamState::new(theta.len(), cfg.lr);
    let mut grad = vec![0.0f64; theta.len()];
    let mut trace = TrainTrace::default();
    let frozen_raw = p.frozen.as_ref().map(|fr| FrozenRaw {
        net_index: fr.net_index,
        point: fr.point.clone(),
        alpha: fr.alpha,
        beta: fr.beta.clone(),
    });

    for epoch in 0..cfg.epochs {
        let loss = epoch_pass(&eng, &mut st, &mut grad)?;
        if !loss.is_finite() {
            return Err(SolverError::NonFiniteLoss { epoch });
        }
        adam_step(&mut adam, &mut theta, &grad).map_err(SolverError::Net)?;
        for (k, pr) in st.params.iter_mut().enumerate() {
            let seg = &theta[eng.offsets[k]..eng.offsets[k + 1]];
            for (dst, &src) in pr.iter_mut().zip(seg) {
                *dst = R::from_f64(src);
            }
        }
        let record_err = (epoch + 1) % cfg.error_every == 0 || epoch + 1 == cfg.epochs;
        let err = if record_err {
            grid.and_then(|g| {
                grid_normalized_error(g, &ansatz.nets, &st.params, frozen_raw.as_ref())
            })
        } else {
            None
        };
        trace.rows.push(TraceRow { epoch, loss, normalized_error: err });
    }
    ansatz.set_flat_params(&theta);
    Ok(trace)
}

fn epoch_pass<R: Real>(
    eng: &Engine<R>,
    st: &mut EpochState<R>,
    grad_out: &mut [f64],
) -> Result<f64, SolverError> {
    let p = eng.p;
    for g in st.block_grads.iter_mut() {
        for v in g.iter_mut() {
            *v = R::zero();
        }
    }
    let frozen_k = eng.frozen_value(&mut st.main_ws, &st.params);
    let params = &st.params;
    let inputs = &st.inputs_r;
    let n_pts = p.n_points;
    let dim = p.dim;

    let mut total_loss;
    let mut total_kbar = R::zero();

    match &p.loss {
        CompiledLoss::Residual { op, w } => {
            let wi = w.unwrap_or(1.0);
            let results: Vec<(f64, R)> = st
                .block_ws
                .par_iter_mut()
                .zip(st.block_grads.par_iter_mut())
                .enumerate()
                .map(|(bi, (ws, grad))| {
                    let lo = bi * BLOCK;
                    let hi = ((bi + 1) * BLOCK).min(n_pts);
                    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut nbar = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut jetbar = vec![R::zero(); eng.stride];
                    let mut loss = 0.0f64;
                    let mut kbar = R::zero();
                    for i in lo..hi {
                        eng.forward_point(ws, params, inputs, i, &mut nq);
                        let r = residual_at(p, *op, i, &nq, frozen_k);
                        loss += r.to_f64() * r.to_f64();
                        let rbar = r.scale_r(2.0 * wi / n_pts as f64);
                        for q in nbar.iter_mut() {
                            *q = [R::zero(); QLEN];
                        }
                        residual_adj(p, *op, i, &nq, rbar, &mut nbar, &mut kbar);
                        eng.backward_point(ws, params, &nbar, &mut jetbar, grad);
                    }
                    (loss, kbar)
                })
                .collect();
            total_loss = wi * results.iter().map(|r| r.0).sum::<f64>() / n_pts as f64;
            for r in &results {
                total_kbar += r.1;
            }
            // boundary misfits (standard-PINN mode)
            let wb = w.map(|w| 1.0 - w).unwrap_or(1.0);
            let mut bgrad = vec![R::zero(); eng.n_params];
            for (b, binp) in p.boundary.iter().zip(&st.boundary_inputs_r) {
                total_loss += boundary_pass(
                    eng,
                    &mut st.main_ws,
                    params,
                    binp,
                    b,
                    wb,
                    frozen_k,
                    &mut bgrad,
                    &mut total_kbar,
                );
            }
            reduce_grads(eng, &st.block_grads, Some(&bgrad), grad_out);
        }
        CompiledLoss::RitzPoisson => {
            let s = p.domain_measure / n_pts as f64;
            let results: Vec<f64> = st
                .block_ws
                .par_iter_mut()
                .zip(st.block_grads.par_iter_mut())
                .enumerate()
                .map(|(bi, (ws, grad))| {
                    let lo = bi * BLOCK;
                    let hi = ((bi + 1) * BLOCK).min(n_pts);
                    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut nbar = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut jetbar = vec![R::zero(); eng.stride];
                    let mut loss = 0.0f64;
                    for i in lo..hi {
                        eng.forward_point(ws, params, inputs, i, &mut nq);
                        let a = &p.geo.a[i];
                        let mut e = R::zero();
                        let mut g = [R::zero(); 4];
                        for m in 0..dim {
                            let mut gm = R::from_f64(a[QG + m]);
                            for k in 0..p.n_nets {
                                gm += grad_term(dim, m, &p.geo.b[k][i], None, &nq[k]);
                            }
                            g[m] = gm;
                            e += (gm * gm).scale_r(0.5);
                        }
                        let u = value_at(&p.geo, dim, p.n_nets, i, &nq, frozen_k);
                        e -= u.scale_r(p.geo.f[i]);
                        loss += s * e.to_f64();
                        for q in nbar.iter_mut() {
                            *q = [R::zero(); QLEN];
                        }
                        for m in 0..dim {
                            let gbar = g[m].scale_r(s);
                            for k in 0..p.n_nets {
                                grad_term_adj(dim, m, &p.geo.b[k][i], None, gbar, &mut nbar[k]);
                            }
                        }
                        let ubar = R::from_f64(-p.geo.f[i] * s);
                        for k in 0..p.n_nets {
                            value_term_adj(
                                &p.geo.b[k][i],
                                cs(&p.geo, k, i, dim),
                                ubar,
                                &mut nbar[k],
                            );
                        }
                        eng.backward_point(ws, params, &nbar, &mut jetbar, grad);
                    }
                    loss
                })
                .collect();
            total_loss = results.iter().sum::<f64>();
            let mut bgrad = vec![R::zero(); eng.n_params];
            for (b, binp) in p.boundary.iter().zip(&st.boundary_inputs_r) {
                total_loss += boundary_pass(
                    eng,
                    &mut st.main_ws,
                    params,
                    binp,
                    b,
                    1.0,
                    frozen_k,
                    &mut bgrad,
                    &mut total_kbar,
                );
            }
            total_loss += point_terms_pass(
                eng,
                &mut st.main_ws,
                params,
                frozen_k,
                &mut bgrad,
                &mut total_kbar,
            );
            reduce_grads(eng, &st.block_grads, Some(&bgrad), grad_out);
        }
        CompiledLoss::RitzPlate => {
            let s = p.domain_measure / n_pts as f64;
            let results: Vec<f64> = st
                .block_ws
                .par_iter_mut()
                .zip(st.block_grads.par_iter_mut())
                .enumerate()
                .map(|(bi, (ws, grad))| {
                    let lo = bi * BLOCK;
                    let hi = ((bi + 1) * BLOCK).min(n_pts);
                    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut nbar = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut jetbar = vec![R::zero(); eng.stride];
                    let mut loss = 0.0f64;
                    for i in lo..hi {
                        eng.forward_point(ws, params, inputs, i, &mut nq);
                        let a = &p.geo.a[i];
                        let mut alap = a[QH];
                        for k in 1..dim {
                            alap += a[QH + k];
                        }
                        let mut lap = R::from_f64(alap);
                        for k in 0..p.n_nets {
                            lap += lap_term(dim, &p.geo.b[k][i], None, &nq[k]);
                        }
                        let u = value_at(&p.geo, dim, p.n_nets, i, &nq, frozen_k);
                        let e = (lap * lap).scale_r(0.5) - u.scale_r(p.geo.f[i]);
                        loss += s * e.to_f64();
                        for q in nbar.iter_mut() {
                            *q = [R::zero(); QLEN];
                        }
                        let lapbar = lap.scale_r(s);
                        let ubar = R::from_f64(-p.geo.f[i] * s);
                        for k in 0..p.n_nets {
                            lap_term_adj(dim, &p.geo.b[k][i], None, lapbar, &mut nbar[k]);
                            value_term_adj(
                                &p.geo.b[k][i],
                                cs(&p.geo, k, i, dim),
                                ubar,
                                &mut nbar[k],
                            );
                        }
                        eng.backward_point(ws, params, &nbar, &mut jetbar, grad);
                    }
                    loss
                })
                .collect();
            total_loss = results.iter().sum::<f64>();
            let mut bgrad = vec![R::zero(); eng.n_params];
            total_loss += point_terms_pass(
                eng,
                &mut st.main_ws,
                params,
                frozen_k,
                &mut bgrad,
                &mut total_kbar,
            );
            reduce_grads(eng, &st.block_grads, Some(&bgrad), grad_out);
        }
        CompiledLoss::Rayleigh => {
            // phase 1: store (u, u') per point
            let store = &mut st.rq_store;
            store
                .par_chunks_mut(BLOCK)
                .zip(st.block_ws.par_iter_mut())
                .enumerate()
                .for_each(|(bi, (chunk, ws))| {
                    let lo = bi * BLOCK;
                    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
                    for (o, slot) in chunk.iter_mut().enumerate() {
                        let i = lo + o;
                        eng.forward_point(ws, params, inputs, i, &mut nq);
                        let u = value_at(&p.geo, dim, p.n_nets, i, &nq, frozen_k);
                        let a = &p.geo.a[i];
                        let mut du = R::from_f64(a[QG]);
                        for k in 0..p.n_nets {
                            du += grad_term(dim, 0, &p.geo.b[k][i], None, &nq[k]);
                        }
                        *slot = (u, du);
                    }
                });
            let mut s0 = 0.0f64;
            let mut s1 = 0.0f64;
            for (u, du) in store.iter() {
                s0 += u.to_f64() * u.to_f64();
                s1 += du.to_f64() * du.to_f64();
            }
            if s0 < 1e-30 {
                return Err(SolverError::DegenerateTrial);
            }
            let mean_sq = s0 / n_pts as f64;
            total_loss = s1 / s0 + (mean_sq - 1.0) * (mean_sq - 1.0);
            // phase 2: per-point adjoints and backward
            let results: Vec<f64> = st
                .block_ws
                .par_iter_mut()
                .zip(st.block_grads.par_iter_mut())
                .enumerate()
                .map(|(bi, (ws, grad))| {
                    let lo = bi * BLOCK;
                    let hi = ((bi + 1) * BLOCK).min(n_pts);
                    let mut nq = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut nbar = vec![[R::zero(); QLEN]; p.n_nets];
                    let mut jetbar = vec![R::zero(); eng.stride];
                    for i in lo..hi {
                        eng.forward_point(ws, params, inputs, i, &mut nq);
                        let (u, du) = st.rq_store[i];
                        let ubar = u.scale_r(
                            -2.0 * s1 / (s0 * s0)
                                + 4.0 * (mean_sq - 1.0) / n_pts as f64,
                        );
                        let dubar = du.scale_r(2.0 / s0);
                        for q in nbar.iter_mut() {
                            *q = [R::zero(); QLEN];
                        }
                        for k in 0..p.n_nets {
                            value_term_adj(
                                &p.geo.b[k][i],
                                cs(&p.geo, k, i, dim),
                                ubar,
                                &mut nbar[k],
                            );
                            grad_term_adj(dim, 0, &p.geo.b[k][i], None, dubar, &mut nbar[k]);
                        }
                        eng.backward_point(ws, params, &nbar, &mut jetbar, grad);
                    }
                    0.0
                })
                .collect();
            let _ = results;
            reduce_grads(eng, &st.block_grads, None, grad_out);
        }
    }

    // frozen-trace backward, deterministic last step
    if p.frozen.is_some() && total_kbar.to_f64() != 0.0 {
        let mut fgrad = vec![R::zero(); eng.n_params];
        let mut jetbar = vec![R::zero(); eng.stride];
        eng.frozen_backward(&mut st.main_ws, params, total_kbar, &mut jetbar, &mut fgrad);
        for (o, g) in grad_out.iter_mut().zip(&fgrad) {
            *o += g.to_f64();
        }
    }
    Ok(total_loss)
}

fn reduce_grads<R: Real>(
    eng: &Engine<R>,
    blocks: &[Vec<R>],
    extra: Option<&[R]>,
    out: &mut [f64],
) {
    for v in out.iter_mut() {
        *v = 0.0;
    }
    for b in blocks {
        for (o, g) in out.iter_mut().zip(b) {
            *o += g.to_f64();
        }
    }
    if let Some(e) = extra {
        for (o, g) in out.iter_mut().zip(e) {
            *o += g.to_f64();
        }
    }
    let _ = eng;
}

// ---------------------------------------------------------------------
// grid evaluation for the normalized error
// ---------------------------------------------------------------------

/// Value-only geometry tables over the evaluation grid.
pub(crate) struct GridData {
    kind: PlanKind,
    inputs: Vec<f64>,
    n_points: usize,
    dim: usize,
    geo: GeoTable,
    exact: Option<Vec<f64>>,
}

impl GridData {
    fn new(ansatz: &Ansatz, grid: &EvalGrid) -> Self {
        let dim = ansatz.nets[0].in_dim();
        let kind = if dim == 1 { PlanKind::Line { ord: 1 } } else { PlanKind::Grad { d: dim } };
        let plan = kind.jet_plan();
        let stride = plan.stride();
        let mut inputs = vec![0.0f64; grid.points.len() * dim * stride];
        let mut buf = vec![0.0f64; dim * stride];
        for (i, x) in grid.points.iter().enumerate() {
            plan.seed_input::<f64>(x, &mut buf);
            inputs[i * dim * stride..(i + 1) * dim * stride].copy_from_slice(&buf);
        }
        let geo = super::compile::grid_geo_tables(ansatz, &grid.points, &kind);
        GridData { kind, inputs, n_points: grid.points.len(), dim, geo, exact: grid.exact.clone() }
    }
}

fn grid_normalized_error<R: Real>(
    data: &GridData,
    nets: &[Network],
    params: &[Vec<R>],
    frozen: Option<&FrozenRaw>,
) -> Option<f64> {
    let exact = data.exact.as_ref()?;
    let plan = data.kind.jet_plan();
    let mut jetnets: Vec<JetNet<R>> = nets.iter().map(|n| JetNet::new(n, &plan)).collect();
    let stride = plan.stride();
    let isz = data.dim * stride;
    let n_nets = nets.len();
    let frozen_k = match frozen {
        None => R::zero(),
        Some(fr) => {
            let mut buf = vec![0.0f64; isz];
            plan.seed_input::<f64>(&fr.point, &mut buf);
            let input: Vec<R> = buf.iter().map(|&v| R::from_f64(v)).collect();
            let out = jetnets[fr.net_index].forward(&params[fr.net_index], &input);
            let q = data.kind.extract(out);
            let mut k = q[QV].scale_r(fr.alpha);
            for (j, bj) in fr.beta.iter().enumerate() {
                k += q[QG + j].scale_r(*bj);
            }
            k
        }
    };
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    let mut nq = vec![[R::zero(); QLEN]; n_nets];
    let mut input_r = vec![R::zero(); isz];
    for i in 0..data.n_points {
        for (dst, &src) in input_r.iter_mut().zip(&data.inputs[i * isz..(i + 1) * isz]) {
            *dst = R::from_f64(src);
        }
        for (k, jn) in jetnets.iter_mut().enumerate() {
            let out = jn.forward(&params[k], &input_r);
            nq[k] = data.kind.extract(out);
        }
        let u = value_at(&data.geo, data.dim, n_nets, i, &nq, frozen_k).to_f64();
        let e = exact[i];
        num += (u - e) * (u - e);
        den += e * e;
    }
    Some(if den > 0.0 { (num / den).sqrt() } else { (num / data.n_points as f64).sqrt() })
}

/// Frozen-trace description shared with the grid evaluator.
struct FrozenRaw {
    net_index: usize,
    point: Vec<f64>,
    alpha: f64,
    beta: Vec<f64>,
}

/// Evaluate the trial function's values over a set of points using the
/// batched path (much faster than the generic evaluator for large grids).
pub fn eval_values(ansatz: &Ansatz, points: &[Vec<f64>]) -> Vec<f64> {
    let grid = EvalGrid { points: points.to_vec(), exact: None };
    let data = GridData::new(ansatz, &grid);
    let plan = data.kind.jet_plan();
    let stride = plan.stride();
    let isz = data.dim * stride;
    let mut jetnets: Vec<JetNet<f64>> =
        ansatz.nets.iter().map(|n| JetNet::new(n, &plan)).collect();
    let params: Vec<Vec<f64>> = ansatz.nets.iter().map(|n| n.params().to_vec()).collect();
    let n_nets = ansatz.nets.len();
    // frozen trace
    let frozen_k = ansatz.form.frozen.first().map_or(0.0, |fr| {
        let mut buf = vec![0.0f64; isz];
        plan.seed_input::<f64>(&fr.point, &mut buf);
        let out = jetnets[fr.net_index].forward(&params[fr.net_index], &buf);
        let q = data.kind.extract(out);
        let mut k = fr.alpha * q[QV];
        for (j, bj) in fr.beta.iter().enumerate() {
            k += bj * q[QG + j];
        }
        k
    });
    let mut out = Vec::with_capacity(points.len());
    let mut nq = vec![[0.0f64; QLEN]; n_nets];
    for i in 0..points.len() {
        let input = &data.inputs[i * isz..(i + 1) * isz];
        for (k, jn) in jetnets.iter_mut().enumerate() {
            let o = jn.forward(&params[k], input);
            nq[k] = data.kind.extract(o);
        }
        out.push(value_at(&data.geo, data.dim, n_nets, i, &nq, frozen_k));
    }
    out
}

/// Train the ansatz in place, returning the per-epoch trace.
pub fn train(
    ansatz: &mut Ansatz,
    loss: &LossSpec,
    points: &PointSet,
    forcing: &Field,
    domain_measure: f64,
    grid: Option<&EvalGrid>,
    cfg: &TrainConfig,
) -> Result<TrainTrace, SolverError> {
    let p = compile(ansatz, loss, points, forcing, domain_measure)?;
    let grid_data = grid.map(|g| GridData::new(ansatz, g));
    match cfg.precision {
        Precision::F64 => run_training::<f64>(&p, ansatz, grid_data.as_ref(), cfg),
        Precision::F32 => run_training::<f32>(&p, ansatz, grid_data.as_ref(), cfg),
    }
}
