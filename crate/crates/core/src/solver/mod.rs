//! Losses, training, and error measurement.
//!
//! The loss functions here are the reference implementations working on
//! any [`FieldEval`]; [`train`] compiles a problem into the batched jet
//! representation in [`train_impl`] and checks against these in tests.

mod compile;
mod train_impl;

pub use compile::{compile, CompiledProblem, FrozenCompiled, LossSpec, PlanKind, PointTerm};
pub use train_impl::{
    eval_values, loss_and_grad, train, EvalGrid, Precision, TraceRow, TrainConfig, TrainTrace,
};

use crate::autodiff::{self, fd};
use crate::error::SolverError;
use crate::field::{Field, FieldEval};
use crate::sample::PieceSamples;

/// Interior residual operators for collocation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResidualOp {
    /// `-lap(u)`, so the residual is `-lap(u) - f`.
    NegLaplacian,
    /// `u'' - alpha u'` in 1D, residual `u'' - alpha u' - f`.
    AdvectionDiffusion { alpha: f64 },
    /// `biharmonic(u) - f`.
    Biharmonic,
    /// `|grad u| - 1/f` with unit speed, residual `|grad u| - 1`.
    Eikonal,
}

impl ResidualOp {
    /// Interior residual at one point via jet evaluation.
    pub fn residual<F: FieldEval>(
        &self,
        u: &F,
        x: &[f64],
        f_val: f64,
    ) -> Result<f64, SolverError> {
        let r = match self {
            ResidualOp::NegLaplacian => -autodiff::laplacian(u, x)? - f_val,
            ResidualOp::AdvectionDiffusion { alpha } => {
                let lap = autodiff::laplacian(u, x)?;
                let g = autodiff::grad_input(u, x)?;
                lap - alpha * g[0] - f_val
            }
            ResidualOp::Biharmonic => autodiff::biharmonic(u, x)? - f_val,
            ResidualOp::Eikonal => {
                let g = autodiff::grad_input(u, x)?;
                let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                norm - 1.0
            }
        };
        if r.is_finite() {
            Ok(r)
        } else {
            Err(SolverError::NonFiniteResidual { point: x.to_vec() })
        }
    }
}

/// Mean squared interior residual; boundary conditions are already exact
/// in the trial function, so there are no boundary terms.
pub fn collocation_loss<F: FieldEval>(
    ansatz: &F,
    residual_op: ResidualOp,
    f: &Field,
    points: &[Vec<f64>],
) -> Result<f64, SolverError> {
    let mut acc = 0.0;
    for x in points {
        let r = residual_op.residual(ansatz, x, f.eval(&x[..]))?;
        acc += r * r;
    }
    Ok(acc / points.len() as f64)
}

/// Standard-PINN loss: interior residual plus per-piece boundary misfit.
/// With `w = Some(w)` the loss is the convex combination
/// `w * PDE + (1-w) * sum(boundary)`; with `None` both get unit weight.
pub fn standard_pinn_loss<F: FieldEval>(
    net: &F,
    residual_op: ResidualOp,
    f: &Field,
    g_pieces: &[(PieceSamples, Field)],
    points: &[Vec<f64>],
    w: Option<f64>,
) -> Result<f64, SolverError> {
    let pde = collocation_loss(net, residual_op, f, points)?;
    let mut boundary = 0.0;
    for (samples, g) in g_pieces {
        let mut acc = 0.0;
        for x in &samples.points {
            let miss = net.eval_s(&x[..]) - g.eval(&x[..]);
            acc += miss * miss;
        }
        boundary += acc / samples.points.len() as f64;
    }
    Ok(match w {
        Some(w) => w * pde + (1.0 - w) * boundary,
        None => pde + boundary,
    })
}

/// A Robin boundary term for the Ritz energy: samples on the piece, the
/// coefficient fields, and the piece measure.
pub struct RobinTerm {
    pub samples: PieceSamples,
    pub c: Field,
    pub h: Field,
}

/// Monte-Carlo Ritz energy for the Poisson problem:
/// `|O| * mean(0.5 |grad u|^2 - f u)` plus
/// `|G_n| * mean(0.5 c u^2 - h u)` per Robin piece.
pub fn ritz_poisson_loss<F: FieldEval>(
    ansatz: &F,
    f: &Field,
    robin_pieces: &[RobinTerm],
    interior_points: &[Vec<f64>],
    domain_measure: f64,
) -> Result<f64, SolverError> {
    let mut acc = 0.0;
    for x in interior_points {
        let g = autodiff::grad_input(ansatz, x)?;
        let u = ansatz.eval_s(&x[..]);
        let e = 0.5 * g.iter().map(|v| v * v).sum::<f64>() - f.eval(&x[..]) * u;
        if !e.is_finite() {
            return Err(SolverError::NonFiniteResidual { point: x.clone() });
        }
        acc += e;
    }
    let mut total = domain_measure * acc / interior_points.len() as f64;
    for term in robin_pieces {
        let mut b = 0.0;
        for x in &term.samples.points {
            let u = ansatz.eval_s(&x[..]);
            b += 0.5 * term.c.eval(&x[..]) * u * u - term.h.eval(&x[..]) * u;
        }
        total += term.samples.measure * b / term.samples.points.len() as f64;
    }
    Ok(total)
}

/// Ritz energy of the clamped plate: `|O| * mean(0.5 (lap u)^2 - f u)`.
pub fn ritz_plate_loss<F: FieldEval>(
    ansatz: &F,
    f: &Field,
    interior_points: &[Vec<f64>],
    domain_measure: f64,
) -> Result<f64, SolverError> {
    let mut acc = 0.0;
    for x in interior_points {
        let lap = autodiff::laplacian(ansatz, x)?;
        let u = ansatz.eval_s(&x[..]);
        acc += 0.5 * lap * lap - f.eval(&x[..]) * u;
    }
    Ok(domain_measure * acc / interior_points.len() as f64)
}

/// Rayleigh quotient with the normalization penalty:
/// `sum(u'^2)/sum(u^2) + (mean(u^2) - 1)^2`.
pub fn rayleigh_loss<F: FieldEval>(
    ansatz: &F,
    points: &[Vec<f64>],
) -> Result<f64, SolverError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for x in points {
        let g = autodiff::grad_input(ansatz, x)?;
        let u = ansatz.eval_s(&x[..]);
        num += g.iter().map(|v| v * v).sum::<f64>();
        den += u * u;
    }
    if den < 1e-30 {
        return Err(SolverError::DegenerateTrial);
    }
    let mean_sq = den / points.len() as f64;
    Ok(num / den + (mean_sq - 1.0) * (mean_sq - 1.0))
}

/// Mean squared Eikonal residual `(|grad u| - 1)^2`.
pub fn eikonal_loss<F: FieldEval>(
    ansatz: &F,
    points: &[Vec<f64>],
) -> Result<f64, SolverError> {
    let mut acc = 0.0;
    for x in points {
        let g = autodiff::grad_input(ansatz, x)?;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        acc += (norm - 1.0) * (norm - 1.0);
    }
    Ok(acc / points.len() as f64)
}

/// Relative discrete L2 error over an evaluation grid; falls back to the
/// absolute L2 norm when the exact solution vanishes.
pub fn normalized_error<F: FieldEval, G: FieldEval>(
    u_pred: &F,
    u_exact: &G,
    grid: &[Vec<f64>],
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for x in grid {
        let p = u_pred.eval_s(&x[..]);
        let e = u_exact.eval_s(&x[..]);
        num += (p - e) * (p - e);
        den += e * e;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        (num / grid.len() as f64).sqrt()
    }
}

/// Finite-difference residual of a Robin/Neumann condition
/// `du/dn + c u - h` at a boundary point with outward normal `n`.
pub fn boundary_condition_residual<F: FieldEval>(
    u: &F,
    x: &[f64],
    outward_normal: &[f64],
    c: f64,
    h: f64,
) -> f64 {
    let f = |p: &[f64]| u.eval_s(p);
    fd::d1(&f, x, outward_normal, 1e-6) + c * f(x) - h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::net::{Activation, Mlp, Network};
    use crate::structures::Ansatz;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid_1d(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|k| vec![(k as f64 + 0.5) / n as f64]).collect()
    }

    #[test]
    fn exact_solution_has_zero_collocation_loss() {
        // rod example: u'' + b = 0 with b = 1 - 2x + 10x^2
        let x = Field::x();
        let u_exact = Field::constant(0.5) - x.powi(2).scale(0.5) + x.powi(3).scale(1.0 / 3.0)
            - x.powi(4).scale(10.0 / 12.0);
        let b = Field::constant(1.0) - x.scale(2.0) + x.powi(2).scale(10.0);
        let loss =
            collocation_loss(&u_exact, ResidualOp::NegLaplacian, &b, &grid_1d(10)).unwrap();
        assert!(loss <= 1e-18, "loss = {loss}");
    }

    #[test]
    fn zero_ansatz_unit_forcing_gives_one() {
        let zero = Field::constant(0.0);
        let one = Field::constant(1.0);
        let loss = collocation_loss(&zero, ResidualOp::NegLaplacian, &one, &grid_1d(10)).unwrap();
        assert_relative_eq!(loss, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fresh_network_loss_is_finite_and_positive() {
        let net = Network::Mlp(Mlp::init(&[2, 50, 50, 1], Activation::Tanh, 42).unwrap());
        let phi = crate::geometry::hypercube_adf(2, 1).unwrap();
        let a = Ansatz::dirichlet(&Field::constant(0.0), &phi, net);
        let f = (Field::x().scale(PI)).sin() * (Field::y().scale(PI)).sin();
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|k| vec![-0.9 + 0.09 * k as f64, 0.05 * k as f64 - 0.45])
            .collect();
        let loss = collocation_loss(&a, ResidualOp::NegLaplacian, &f, &pts).unwrap();
        assert!(loss.is_finite() && loss > 0.0);
    }

    #[test]
    fn rayleigh_quotient_of_sine_is_pi_squared() {
        let u = (Field::x().scale(PI)).sin();
        let pts = grid_1d(400);
        let loss = rayleigh_loss(&u, &pts).unwrap();
        // mean of sin^2 is 1/2, so the constraint penalty is 1/4
        assert_relative_eq!(loss, PI * PI + 0.25, max_relative = 1e-3);

        // scaled mode: quotient unchanged, penalty (2^2/2 - 1)^2 = 1
        let u2 = (Field::x().scale(PI)).sin().scale(2.0);
        let loss2 = rayleigh_loss(&u2, &pts).unwrap();
        assert_relative_eq!(loss2, PI * PI + 1.0, max_relative = 1e-3);
    }

    #[test]
    fn rayleigh_rejects_degenerate_trial() {
        let zero = Field::constant(0.0);
        assert!(matches!(
            rayleigh_loss(&zero, &grid_1d(10)),
            Err(SolverError::DegenerateTrial)
        ));
    }

    #[test]
    fn eikonal_exact_distance_and_zero_field() {
        // distance to the line x = 0 in free space
        let u = Field::x();
        let pts: Vec<Vec<f64>> = (0..10).map(|k| vec![0.1 * k as f64, 0.3]).collect();
        assert_relative_eq!(eikonal_loss(&u, &pts).unwrap(), 0.0, epsilon = 1e-14);
        let zero = Field::constant(0.0);
        assert_relative_eq!(eikonal_loss(&zero, &pts).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn normalized_error_basics() {
        let u = (Field::x().scale(PI)).sin();
        let grid = grid_1d(201);
        assert_eq!(normalized_error(&u, &u, &grid), 0.0);
        let double = u.clone().scale(2.0);
        assert_relative_eq!(normalized_error(&double, &u, &grid), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ritz_energy_of_zero_is_zero() {
        let zero = Field::constant(0.0);
        let pts = grid_1d(10);
        let e = ritz_poisson_loss(&zero, &Field::constant(0.0), &[], &pts, 1.0).unwrap();
        assert_eq!(e, 0.0);
        let ep = ritz_plate_loss(&zero, &Field::constant(1.0), &pts, 1.0).unwrap();
        assert_eq!(ep, 0.0);
    }

    #[test]
    fn ritz_energy_matches_closed_form_for_exact_solution() {
        // -u'' = 1 on (0,1), u(0)=u(1)=0, u = x(1-x)/2
        // Pi[u] = 1/2 int u'^2 - int u = 1/2 * 1/12 - 1/12 = -1/24
        let x = Field::x();
        let u = x.clone() * (Field::constant(1.0) - x) * Field::constant(0.5);
        let pts = grid_1d(4000);
        let e = ritz_poisson_loss(&u, &Field::constant(1.0), &[], &pts, 1.0).unwrap();
        assert_relative_eq!(e, -1.0 / 24.0, max_relative = 0.02);
    }
}
