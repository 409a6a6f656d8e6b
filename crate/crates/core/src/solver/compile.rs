//! Compilation of a trial function + loss + point set into flat buffers
//! the training loop can sweep quickly.
//!
//! Geometry never changes during training, so every coefficient field of
//! the affine form (and the forcing) is evaluated once per collocation
//! point into a derivative table. Per epoch only the network jets are
//! recomputed; the residual assembly and its hand-written adjoint connect
//! them.

use crate::error::SolverError;
use crate::field::Field;
use crate::jet::{Jet, Jet2, Jet3, Jet4, Jet5};
use crate::net::fastjet::JetPlan;
use crate::sample::PointSet;
use crate::solver::ResidualOp;
use crate::structures::Ansatz;

/// Derivative-table slot layout (`Q` arrays): value, gradient, Hessian
/// diagonal, Hessian off-diagonal (2D), third derivatives
/// `[xxx, xxy, xyy, yyy]`, biharmonic.
pub const QV: usize = 0;
pub const QG: usize = 1; // ..QG+4
pub const QH: usize = 5; // ..QH+4
pub const QXY: usize = 9;
pub const QT: usize = 10; // ..QT+4
pub const QB: usize = 14;
pub const QLEN: usize = 15;

pub type Q<R> = [R; QLEN];

#[inline]
pub fn q_lap<R: crate::net::fastjet::Real>(q: &Q<R>, d: usize) -> R {
    let mut acc = R::zero();
    for k in 0..d {
        acc += q[QH + k];
    }
    acc
}

/// Which derivative set the jet plan provides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanKind {
    /// One direction in 1D, truncation order `ord`.
    Line { ord: usize },
    /// Coordinate axes, order 1 (values and gradients only).
    Grad { d: usize },
    /// Coordinate axes, order 2 (plus pure second derivatives).
    Axes { d: usize },
    /// 2D axes + diagonals at order `ord` in {3,4}: full Hessian, third
    /// derivatives, and (at 4) the biharmonic by polarization.
    Diag2 { ord: usize },
}

impl PlanKind {
    pub fn jet_plan(&self) -> JetPlan {
        match *self {
            PlanKind::Line { ord } => JetPlan::new(vec![vec![1.0]], ord),
            PlanKind::Grad { d } => JetPlan::axes(d, 1),
            PlanKind::Axes { d } => JetPlan::axes(d, 2),
            PlanKind::Diag2 { ord } => JetPlan::axes_and_diagonals_2d(ord),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            PlanKind::Line { .. } => 1,
            PlanKind::Grad { d } | PlanKind::Axes { d } => d,
            PlanKind::Diag2 { .. } => 2,
        }
    }

    pub fn stride(&self) -> usize {
        self.jet_plan().stride()
    }

    /// Pull the derivative table out of a multijet.
    pub fn extract<R: crate::net::fastjet::Real>(&self, jet: &[R]) -> Q<R> {
        let mut q = [R::zero(); QLEN];
        q[QV] = jet[0];
        match *self {
            PlanKind::Line { ord } => {
                q[QG] = jet[1];
                if ord >= 2 {
                    q[QH] = R::from_f64(2.0) * jet[2];
                }
                if ord >= 3 {
                    q[QT] = R::from_f64(6.0) * jet[3];
                }
                if ord >= 4 {
                    q[QB] = R::from_f64(24.0) * jet[4];
                }
            }
            PlanKind::Grad { d } => {
                for k in 0..d {
                    q[QG + k] = jet[1 + k];
                }
            }
            PlanKind::Axes { d } => {
                for k in 0..d {
                    q[QG + k] = jet[1 + 2 * k];
                    q[QH + k] = R::from_f64(2.0) * jet[2 + 2 * k];
                }
            }
            PlanKind::Diag2 { ord } => {
                let c = |t: usize, k: usize| jet[1 + t * ord + (k - 1)];
                q[QG] = c(0, 1);
                q[QG + 1] = c(1, 1);
                q[QH] = R::from_f64(2.0) * c(0, 2);
                q[QH + 1] = R::from_f64(2.0) * c(1, 2);
                q[QXY] = c(2, 2) - c(0, 2) - c(1, 2);
                if ord >= 3 {
                    q[QT] = R::from_f64(6.0) * c(0, 3); // xxx
                    q[QT + 3] = R::from_f64(6.0) * c(1, 3); // yyy
                    q[QT + 2] = c(2, 3) + c(3, 3) - R::from_f64(2.0) * c(0, 3); // xyy
                    q[QT + 1] = c(2, 3) - c(3, 3) - R::from_f64(2.0) * c(1, 3); // xxy
                }
                if ord >= 4 {
                    q[QB] = R::from_f64(16.0) * (c(0, 4) + c(1, 4))
                        + R::from_f64(4.0) * (c(2, 4) + c(3, 4));
                }
            }
        }
        q
    }

    /// Transpose of [`Self::extract`]: scatter table adjoints back onto
    /// jet-coefficient adjoints.
    pub fn extract_adj<R: crate::net::fastjet::Real>(&self, qbar: &Q<R>, jetbar: &mut [R]) {
        jetbar[0] += qbar[QV];
        match *self {
            PlanKind::Line { ord } => {
                jetbar[1] += qbar[QG];
                if ord >= 2 {
                    jetbar[2] += R::from_f64(2.0) * qbar[QH];
                }
                if ord >= 3 {
                    jetbar[3] += R::from_f64(6.0) * qbar[QT];
                }
                if ord >= 4 {
                    jetbar[4] += R::from_f64(24.0) * qbar[QB];
                }
            }
            PlanKind::Grad { d } => {
                for k in 0..d {
                    jetbar[1 + k] += qbar[QG + k];
                }
            }
            PlanKind::Axes { d } => {
                for k in 0..d {
                    jetbar[1 + 2 * k] += qbar[QG + k];
                    jetbar[2 + 2 * k] += R::from_f64(2.0) * qbar[QH + k];
                }
            }
            PlanKind::Diag2 { ord } => {
                let mut add = |t: usize, k: usize, v: R| jetbar[1 + t * ord + (k - 1)] += v;
                add(0, 1, qbar[QG]);
                add(1, 1, qbar[QG + 1]);
                add(0, 2, R::from_f64(2.0) * qbar[QH] - qbar[QXY]);
                add(1, 2, R::from_f64(2.0) * qbar[QH + 1] - qbar[QXY]);
                add(2, 2, qbar[QXY]);
                if ord >= 3 {
                    add(0, 3, R::from_f64(6.0) * qbar[QT] - R::from_f64(2.0) * qbar[QT + 2]);
                    add(1, 3, R::from_f64(6.0) * qbar[QT + 3] - R::from_f64(2.0) * qbar[QT + 1]);
                    add(2, 3, qbar[QT + 2] + qbar[QT + 1]);
                    add(3, 3, qbar[QT + 2] - qbar[QT + 1]);
                }
                if ord >= 4 {
                    add(0, 4, R::from_f64(16.0) * qbar[QB]);
                    add(1, 4, R::from_f64(16.0) * qbar[QB]);
                    add(2, 4, R::from_f64(4.0) * qbar[QB]);
                    add(3, 4, R::from_f64(4.0) * qbar[QB]);
                }
            }
        }
    }
}

/// Evaluate a geometric field's derivative table at one point by running
/// jets through the field AST.
pub fn field_quants(field: &Field, x: &[f64], kind: &PlanKind) -> Q<f64> {
    let plan = kind.jet_plan();
    let stride = plan.stride();
    let mut jet = vec![0.0f64; stride];
    match kind {
        PlanKind::Line { ord } => {
            let fill = |jet: &mut [f64], out: &[f64]| jet.copy_from_slice(out);
            match ord {
                1 => {
                    let o = field.eval(&[Jet2::<f64>::seed(x[0], 1.0)]);
                    fill(&mut jet, &o.c);
                }
                2 => {
                    let o = field.eval(&[Jet3::<f64>::seed(x[0], 1.0)]);
                    fill(&mut jet, &o.c);
                }
                3 => {
                    let o = field.eval(&[Jet4::<f64>::seed(x[0], 1.0)]);
                    fill(&mut jet, &o.c);
                }
                _ => {
                    let o = field.eval(&[Jet5::<f64>::seed(x[0], 1.0)]);
                    fill(&mut jet, &o.c);
                }
            }
        }
        _ => {
            let ord = plan.ord;
            for (t, dir) in plan.dirs.iter().enumerate() {
                match ord {
                    1 => {
                        let p: Vec<Jet2<f64>> =
                            x.iter().zip(dir).map(|(&v, &d)| Jet::seed(v, d)).collect();
                        let o = field.eval(&p);
                        jet[0] = o.c[0];
                        jet[1 + t] = o.c[1];
                    }
                    2 => {
                        let p: Vec<Jet3<f64>> =
                            x.iter().zip(dir).map(|(&v, &d)| Jet::seed(v, d)).collect();
                        let o = field.eval(&p);
                        jet[0] = o.c[0];
                        jet[1 + 2 * t] = o.c[1];
                        jet[2 + 2 * t] = o.c[2];
                    }
                    3 => {
                        let p: Vec<Jet4<f64>> =
                            x.iter().zip(dir).map(|(&v, &d)| Jet::seed(v, d)).collect();
                        let o = field.eval(&p);
                        jet[0] = o.c[0];
                        for k in 1..=3 {
                            jet[t * 3 + k] = o.c[k];
                        }
                    }
                    _ => {
                        let p: Vec<Jet5<f64>> =
                            x.iter().zip(dir).map(|(&v, &d)| Jet::seed(v, d)).collect();
                        let o = field.eval(&p);
                        jet[0] = o.c[0];
                        for k in 1..=4 {
                            jet[t * 4 + k] = o.c[k];
                        }
                    }
                }
            }
        }
    }
    kind.extract(&jet)
}

/// A concentrated work term in a Ritz energy:
/// `value_coef * u(point) + grad_coef . grad u(point)`
/// (point loads enter with `value_coef = -1`, point moments through
/// `grad_coef`).
#[derive(Clone, Debug)]
pub struct PointTerm {
    pub point: Vec<f64>,
    pub value_coef: f64,
    pub grad_coef: Vec<f64>,
}

/// Loss requested from the trainer.
#[derive(Clone, Debug)]
pub enum LossSpec {
    /// Mean squared interior residual; BCs are exact in the ansatz.
    Collocation { op: ResidualOp },
    /// Interior residual plus boundary misfits `(u - g)^2` per piece,
    /// optionally as the convex combination `w, 1-w`.
    StandardPinn { op: ResidualOp, data: Vec<(usize, Field)>, w: Option<f64> },
    /// Poisson potential energy; `robin` holds `(piece, c, h)` terms.
    RitzPoisson { robin: Vec<(usize, Field, Field)>, point_terms: Vec<PointTerm> },
    /// Plate bending energy.
    RitzPlate { point_terms: Vec<PointTerm> },
    /// Rayleigh quotient with its normalization penalty.
    Rayleigh,
}

/// Interior residual operators after compilation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CompiledOp {
    NegLap,
    AdvDiff { alpha: f64 },
    Bih,
    Eik,
}

#[derive(Clone, Debug)]
pub enum CompiledLoss {
    Residual { op: CompiledOp, w: Option<f64> },
    RitzPoisson,
    RitzPlate,
    Rayleigh,
}

/// Boundary batch kinds.
#[derive(Clone, Debug)]
pub enum BoundaryKind {
    /// `(u - g)^2` misfit, mean over the batch.
    Misfit { g: Vec<f64> },
    /// Ritz Robin energy `|G| * mean(0.5 c u^2 - h u)`.
    RobinEnergy { c: Vec<f64>, h: Vec<f64>, measure: f64 },
}

/// Per-point geometry tables for one batch of points.
#[derive(Clone, Debug, Default)]
pub struct GeoTable {
    pub a: Vec<Q<f64>>,
    /// per net: derivative tables of `b`
    pub b: Vec<Vec<Q<f64>>>,
    /// per net: derivative tables of `c_j`, flattened `[point * dim + j]`
    /// (empty when the structure has no gradient coupling)
    pub c: Vec<Vec<Q<f64>>>,
    /// frozen-trace coupling coefficient (operator applied to gamma)
    pub frozen_coef: Vec<f64>,
    /// forcing values
    pub f: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CompiledBoundary {
    pub inputs: Vec<f64>,
    pub n_points: usize,
    pub geo: GeoTable,
    pub kind: BoundaryKind,
}

/// Frozen derivative trace: one extra evaluation point shared by all
/// collocation points.
#[derive(Clone, Debug)]
pub struct FrozenCompiled {
    pub net_index: usize,
    pub point: Vec<f64>,
    pub input: Vec<f64>,
    pub alpha: f64,
    pub beta: Vec<f64>,
}

/// A compiled concentrated work term.
#[derive(Clone, Debug)]
pub struct CompiledPointTerm {
    pub input: Vec<f64>,
    pub geo: GeoTable,
    pub value_coef: f64,
    pub grad_coef: Vec<f64>,
}

/// Everything the epoch loop needs, geometry pre-evaluated.
#[derive(Clone, Debug)]
pub struct CompiledProblem {
    pub kind: PlanKind,
    pub plan: JetPlan,
    pub dim: usize,
    pub n_nets: usize,
    pub has_c: Vec<bool>,
    pub loss: CompiledLoss,
    pub n_points: usize,
    pub inputs: Vec<f64>,
    pub geo: GeoTable,
    pub boundary: Vec<CompiledBoundary>,
    pub point_terms: Vec<CompiledPointTerm>,
    pub frozen: Option<FrozenCompiled>,
    pub domain_measure: f64,
}

fn compiled_op(op: ResidualOp) -> CompiledOp {
    match op {
        ResidualOp::NegLaplacian => CompiledOp::NegLap,
        ResidualOp::AdvectionDiffusion { alpha } => CompiledOp::AdvDiff { alpha },
        ResidualOp::Biharmonic => CompiledOp::Bih,
        ResidualOp::Eikonal => CompiledOp::Eik,
    }
}

fn plan_for(op: Option<CompiledOp>, loss: &LossSpec, dim: usize, has_c: bool) -> PlanKind {
    match loss {
        LossSpec::Collocation { .. } | LossSpec::StandardPinn { .. } => match op.unwrap() {
            CompiledOp::NegLap | CompiledOp::AdvDiff { .. } => match dim {
                1 => PlanKind::Line { ord: if has_c { 3 } else { 2 } },
                2 => {
                    if has_c {
                        PlanKind::Diag2 { ord: 3 }
                    } else {
                        PlanKind::Axes { d: 2 }
                    }
                }
                d => PlanKind::Axes { d },
            },
            CompiledOp::Bih => match dim {
                1 => PlanKind::Line { ord: 4 },
                _ => PlanKind::Diag2 { ord: 4 },
            },
            CompiledOp::Eik => {
                if dim == 1 {
                    PlanKind::Line { ord: 1 }
                } else {
                    PlanKind::Grad { d: dim }
                }
            }
        },
        LossSpec::RitzPoisson { .. } | LossSpec::Rayleigh => {
            if dim == 1 {
                PlanKind::Line { ord: 1 }
            } else {
                PlanKind::Grad { d: dim }
            }
        }
        LossSpec::RitzPlate { .. } => {
            if dim == 1 {
                PlanKind::Line { ord: 2 }
            } else {
                PlanKind::Axes { d: dim }
            }
        }
    }
}

/// Apply the interior operator to a geometry-only field (for the
/// frozen-trace coupling and residual checks of `a`-parts).
fn op_on_field(field: &Field, x: &[f64], op: CompiledOp, kind: &PlanKind) -> f64 {
    let q = field_quants(field, x, kind);
    match op {
        CompiledOp::NegLap => -q_lap(&q, kind.dim()),
        CompiledOp::AdvDiff { alpha } => q_lap(&q, 1) - alpha * q[QG],
        CompiledOp::Bih => q[QB],
        CompiledOp::Eik => 0.0,
    }
}

fn geo_tables(
    ansatz: &Ansatz,
    points: &[Vec<f64>],
    kind: &PlanKind,
    forcing: Option<&Field>,
    op: Option<CompiledOp>,
) -> GeoTable {
    let n_nets = ansatz.nets.len();
    let mut table = GeoTable {
        a: Vec::with_capacity(points.len()),
        b: vec![Vec::with_capacity(points.len()); n_nets],
        c: vec![Vec::new(); n_nets],
        frozen_coef: Vec::new(),
        f: Vec::with_capacity(points.len()),
    };
    for x in points {
        table.a.push(field_quants(&ansatz.form.a, x, kind));
        for (k, term) in ansatz.form.terms.iter().enumerate() {
            table.b[k].push(field_quants(&term.b, x, kind));
            for cj in &term.cvec {
                table.c[k].push(field_quants(cj, x, kind));
            }
        }
        if let Some(f) = forcing {
            table.f.push(f.eval(&x[..]));
        }
        if let Some(fr) = ansatz.form.frozen.first() {
            if let Some(op) = op {
                table.frozen_coef.push(op_on_field(&fr.gamma, x, op, kind));
            } else {
                table.frozen_coef.push(fr.gamma.eval(&x[..]));
            }
        }
    }
    table
}

/// Value-only geometry tables (grid evaluation).
pub(crate) fn grid_geo_tables(ansatz: &Ansatz, points: &[Vec<f64>], kind: &PlanKind) -> GeoTable {
    geo_tables(ansatz, points, kind, None, None)
}

/// Compile a problem for the batched trainer.
pub fn compile(
    ansatz: &Ansatz,
    loss: &LossSpec,
    points: &PointSet,
    forcing: &Field,
    domain_measure: f64,
) -> Result<CompiledProblem, SolverError> {
    let dim = ansatz.nets[0].in_dim();
    let n_nets = ansatz.nets.len();
    let has_c: Vec<bool> =
        ansatz.form.terms.iter().map(|t| !t.cvec.is_empty()).collect();
    let any_c = has_c.iter().any(|&b| b);
    let op = match loss {
        LossSpec::Collocation { op } | LossSpec::StandardPinn { op, .. } => {
            Some(compiled_op(*op))
        }
        _ => None,
    };
    if matches!(op, Some(CompiledOp::Bih)) && any_c {
        return Err(SolverError::Config(
            "biharmonic collocation is only supported for structures without \
             gradient coupling"
                .into(),
        ));
    }
    if any_c && dim > 2 {
        return Err(SolverError::Config(
            "gradient-coupled structures are supported in 1D and 2D only".into(),
        ));
    }
    if !ansatz.form.frozen.is_empty() && matches!(op, Some(CompiledOp::Eik)) {
        return Err(SolverError::Config(
            "frozen derivative traces are not supported with the Eikonal residual".into(),
        ));
    }
    if matches!(
        loss,
        LossSpec::RitzPoisson { .. } | LossSpec::RitzPlate { .. } | LossSpec::Rayleigh
    ) && any_c
    {
        return Err(SolverError::Config(
            "Ritz losses expect kinematically admissible structures without \
             gradient coupling"
                .into(),
        ));
    }
    let kind = plan_for(op, loss, dim, any_c);
    let plan = kind.jet_plan();
    let stride = plan.stride();

    // seeded input jets for every interior point
    let mut inputs = vec![0.0f64; points.interior.len() * dim * stride];
    {
        let mut buf = vec![0.0f64; dim * stride];
        for (i, x) in points.interior.iter().enumerate() {
            plan.seed_input::<f64>(x, &mut buf);
            inputs[i * dim * stride..(i + 1) * dim * stride].copy_from_slice(&buf);
        }
    }
    let geo = geo_tables(ansatz, &points.interior, &kind, Some(forcing), op);

    // frozen trace
    let frozen = ansatz.form.frozen.first().map(|fr| {
        let mut input = vec![0.0f64; dim * stride];
        plan.seed_input::<f64>(&fr.point, &mut input);
        FrozenCompiled {
            net_index: fr.net_index,
            point: fr.point.clone(),
            input,
            alpha: fr.alpha,
            beta: fr.beta.clone(),
        }
    });

    // boundary batches and concentrated work terms
    let mut boundary = Vec::new();
    let mut point_terms = Vec::new();
    let compile_point_terms = |terms: &[PointTerm]| {
        terms
            .iter()
            .map(|t| {
                let mut input = vec![0.0f64; dim * stride];
                plan.seed_input::<f64>(&t.point, &mut input);
                CompiledPointTerm {
                    input,
                    geo: geo_tables(ansatz, std::slice::from_ref(&t.point), &kind, None, None),
                    value_coef: t.value_coef,
                    grad_coef: t.grad_coef.clone(),
                }
            })
            .collect::<Vec<_>>()
    };
    let compiled_loss = match loss {
        LossSpec::Collocation { .. } => CompiledLoss::Residual { op: op.unwrap(), w: None },
        LossSpec::StandardPinn { data, w, .. } => {
            for (piece_idx, g) in data {
                let samples = points
                    .boundary
                    .iter()
                    .find(|p| p.piece == *piece_idx)
                    .ok_or_else(|| {
                        SolverError::Config(format!("no boundary samples for piece {piece_idx}"))
                    })?;
                let mut b_inputs = vec![0.0f64; samples.points.len() * dim * stride];
                let mut buf = vec![0.0f64; dim * stride];
                for (i, x) in samples.points.iter().enumerate() {
                    plan.seed_input::<f64>(x, &mut buf);
                    b_inputs[i * dim * stride..(i + 1) * dim * stride].copy_from_slice(&buf);
                }
                let bgeo = geo_tables(ansatz, &samples.points, &kind, None, None);
                let gvals: Vec<f64> =
                    samples.points.iter().map(|x| g.eval(&x[..])).collect();
                boundary.push(CompiledBoundary {
                    inputs: b_inputs,
                    n_points: samples.points.len(),
                    geo: bgeo,
                    kind: BoundaryKind::Misfit { g: gvals },
                });
            }
            CompiledLoss::Residual { op: op.unwrap(), w: *w }
        }
        LossSpec::RitzPoisson { robin, point_terms: pts_terms } => {
            point_terms = compile_point_terms(pts_terms);
            for (piece_idx, c, h) in robin {
                let samples = points
                    .boundary
                    .iter()
                    .find(|p| p.piece == *piece_idx)
                    .ok_or_else(|| {
                        SolverError::Config(format!("no boundary samples for piece {piece_idx}"))
                    })?;
                let mut b_inputs = vec![0.0f64; samples.points.len() * dim * stride];
                let mut buf = vec![0.0f64; dim * stride];
                for (i, x) in samples.points.iter().enumerate() {
                    plan.seed_input::<f64>(x, &mut buf);
                    b_inputs[i * dim * stride..(i + 1) * dim * stride].copy_from_slice(&buf);
                }
                let bgeo = geo_tables(ansatz, &samples.points, &kind, None, None);
                boundary.push(CompiledBoundary {
                    inputs: b_inputs,
                    n_points: samples.points.len(),
                    geo: bgeo,
                    kind: BoundaryKind::RobinEnergy {
                        c: samples.points.iter().map(|x| c.eval(&x[..])).collect(),
                        h: samples.points.iter().map(|x| h.eval(&x[..])).collect(),
                        measure: samples.measure,
                    },
                });
            }
            CompiledLoss::RitzPoisson
        }
        LossSpec::RitzPlate { point_terms: pts_terms } => {
            point_terms = compile_point_terms(pts_terms);
            CompiledLoss::RitzPlate
        }
        LossSpec::Rayleigh => CompiledLoss::Rayleigh,
    };

    Ok(CompiledProblem {
        kind,
        plan,
        dim,
        n_nets,
        has_c,
        loss: compiled_loss,
        n_points: points.interior.len(),
        inputs,
        geo,
        boundary,
        point_terms,
        frozen,
        domain_measure,
    })
}
