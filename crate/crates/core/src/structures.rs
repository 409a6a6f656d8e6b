//! Trial functions that satisfy boundary conditions identically.
//!
//! Every structure is stored as an affine form in the network value and
//! gradient, `u(x) = a(x) + sum_k [ b_k(x) N_k(x) + c_k(x) . grad N_k(x) ]`,
//! with purely geometric coefficient fields. The boundary conditions hold
//! for arbitrary parameters because the coefficients vanish appropriately
//! on the boundary. Both the generic evaluator here and the compiled
//! trainer consume the same coefficients.

use crate::field::{Field, FieldEval, Nest};
use crate::geometry::d1_field;
use crate::net::Network;

/// Per-piece boundary condition for transfinite assembly.
#[derive(Clone, Debug)]
pub enum PieceKind {
    Dirichlet(Field),
    Robin { c: Field, h: Field },
}

/// One boundary piece: its ADF, condition, and transfinite exponent.
#[derive(Clone, Debug)]
pub struct BoundaryPiece {
    pub adf: Field,
    pub kind: PieceKind,
    pub mu: i32,
}

/// Contribution of one network to the affine form.
#[derive(Clone, Debug)]
pub struct NetTerm {
    pub b: Field,
    /// Coefficients of `grad N`; empty when the structure has no
    /// derivative coupling.
    pub cvec: Vec<Field>,
}

/// A derivative trace frozen at a fixed boundary point (the 1D variant of
/// the mixed-condition structure): adds `gamma(x) * (alpha N(x_b) +
/// beta . grad N(x_b))`.
#[derive(Clone, Debug)]
pub struct FrozenTrace {
    pub net_index: usize,
    pub point: Vec<f64>,
    pub gamma: Field,
    pub alpha: f64,
    pub beta: Vec<f64>,
}

/// The affine decomposition of a trial function.
#[derive(Clone, Debug)]
pub struct AffineForm {
    pub a: Field,
    pub terms: Vec<NetTerm>,
    pub frozen: Vec<FrozenTrace>,
}

/// A trial function: networks plus the affine form tying them to the
/// geometry. Evaluation is pure; all structures are affine in each
/// network's output.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub nets: Vec<Network>,
    pub form: AffineForm,
}

fn partial(f: &Field, j: usize) -> Field {
    // grad(x_j) . grad(f) = df/dx_j
    d1_field(&(-Field::coord(j)), f)
}

fn zero() -> Field {
    Field::constant(0.0)
}

impl Ansatz {
    /// Standard PINN trial: the bare network.
    pub fn bare(net: Network) -> Self {
        Ansatz {
            nets: vec![net],
            form: AffineForm {
                a: zero(),
                terms: vec![NetTerm { b: Field::constant(1.0), cvec: vec![] }],
                frozen: vec![],
            },
        }
    }

    /// `u = g + phi N`: equals `g` wherever `phi = 0`, for any parameters.
    pub fn dirichlet(g: &Field, phi: &Field, net: Network) -> Self {
        Ansatz {
            nets: vec![net],
            form: AffineForm {
                a: g.clone(),
                terms: vec![NetTerm { b: phi.clone(), cvec: vec![] }],
                frozen: vec![],
            },
        }
    }

    /// `u = [1 + phi_full D1^phi](N1) - phi_full h + phi_full^2 N2`:
    /// `du/dn = h` on the zero set of `phi` when `phi` is first-order
    /// normalized. Pass `phi_full = phi` for a single-piece boundary.
    pub fn neumann(h: &Field, phi: &Field, phi_full: &Field, n1: Network, n2: Network) -> Self {
        let dim = n1.in_dim();
        let cvec = (0..dim)
            .map(|j| -(phi_full.clone() * partial(phi, j)))
            .collect();
        Ansatz {
            nets: vec![n1, n2],
            form: AffineForm {
                a: -(phi_full.clone() * h.clone()),
                terms: vec![
                    NetTerm { b: Field::constant(1.0), cvec },
                    NetTerm { b: phi_full.clone() * phi_full.clone(), cvec: vec![] },
                ],
                frozen: vec![],
            },
        }
    }

    /// `u = [1 + phi (c + D1^phi)](N1) - phi h + phi^2 N2`:
    /// `du/dn + c u = h` on the zero set of `phi`.
    pub fn robin(c: &Field, h: &Field, phi: &Field, n1: Network, n2: Network) -> Self {
        let dim = n1.in_dim();
        let cvec = (0..dim).map(|j| -(phi.clone() * partial(phi, j))).collect();
        Ansatz {
            nets: vec![n1, n2],
            form: AffineForm {
                a: -(phi.clone() * h.clone()),
                terms: vec![
                    NetTerm { b: Field::constant(1.0) + phi.clone() * c.clone(), cvec },
                    NetTerm { b: phi.clone() * phi.clone(), cvec: vec![] },
                ],
                frozen: vec![],
            },
        }
    }

    /// Superposed structure for `u = g` on the zero set of `phi1` and
    /// `du/dn + c u = h` on the zero set of `phi2`, one shared network.
    ///
    /// The normal-derivative operator acts as the field
    /// `-grad(phi2) . grad(.)` everywhere by default; `frozen_at` switches
    /// to the variant where the derivative trace is evaluated at a fixed
    /// boundary point (the usual 1D instantiation).
    pub fn mixed_i(
        g: &Field,
        c: &Field,
        h: &Field,
        phi1: &Field,
        phi2: &Field,
        net: Network,
        frozen_at: Option<&[f64]>,
    ) -> Self {
        let dim = net.in_dim();
        let phi = phi1.clone() * phi2.clone() / (phi1.clone() + phi2.clone());
        match frozen_at {
            None => {
                // b = phi1 + phi (phi2 + c phi1 - grad phi1 . grad phi2)
                let b = phi1.clone()
                    + phi.clone()
                        * (phi2.clone() + c.clone() * phi1.clone() + d1_field(phi2, phi1));
                let cvec = (0..dim)
                    .map(|j| -(phi.clone() * phi1.clone() * partial(phi2, j)))
                    .collect();
                let a = g.clone()
                    + phi.clone()
                        * (d1_field(phi2, g) + c.clone() * g.clone() - h.clone());
                Ansatz {
                    nets: vec![net],
                    form: AffineForm {
                        a,
                        terms: vec![NetTerm { b, cvec }],
                        frozen: vec![],
                    },
                }
            }
            Some(xb) => {
                // trace of D1^phi2(g + phi1 N) frozen at xb
                let db_g = d1_field(phi2, g).eval(xb);
                let grad_phi2: Vec<f64> =
                    (0..dim).map(|j| partial(phi2, j).eval(xb)).collect();
                let grad_phi1: Vec<f64> =
                    (0..dim).map(|j| partial(phi1, j).eval(xb)).collect();
                let phi1_b = phi1.eval(xb);
                let alpha: f64 =
                    -(0..dim).map(|j| grad_phi2[j] * grad_phi1[j]).sum::<f64>();
                let beta: Vec<f64> = (0..dim).map(|j| -phi1_b * grad_phi2[j]).collect();
                let b = phi1.clone()
                    + phi.clone() * (phi2.clone() + c.clone() * phi1.clone());
                let a = g.clone()
                    + phi.clone()
                        * (Field::constant(db_g) + c.clone() * g.clone() - h.clone());
                Ansatz {
                    nets: vec![net],
                    form: AffineForm {
                        a,
                        terms: vec![NetTerm { b, cvec: vec![] }],
                        frozen: vec![FrozenTrace {
                            net_index: 0,
                            point: xb.to_vec(),
                            gamma: phi,
                            alpha,
                            beta,
                        }],
                    },
                }
            }
        }
    }

    /// Transfinite structure for the same mixed conditions with weights
    /// `w1 = phi1/(phi1 + phi2^2)`, `w2 = phi2^2/(phi1 + phi2^2)` and
    /// remainder `phi1 phi2^2 N`.
    pub fn mixed_ii(
        g: &Field,
        c: &Field,
        h: &Field,
        phi1: &Field,
        phi2: &Field,
        net: Network,
    ) -> Self {
        let dim = net.in_dim();
        let denom = phi1.clone() + phi2.clone() * phi2.clone();
        let w1 = phi1.clone() / denom.clone();
        let w2 = (phi2.clone() * phi2.clone()) / denom;
        // u2 = (1 + phi2 c) N - phi2 (grad phi2 . grad N) - phi2 h
        let b = w1.clone() * (Field::constant(1.0) + phi2.clone() * c.clone())
            + phi1.clone() * phi2.clone() * phi2.clone();
        let cvec = (0..dim)
            .map(|j| -(w1.clone() * phi2.clone() * partial(phi2, j)))
            .collect();
        let a = w2 * g.clone() - w1 * phi2.clone() * h.clone();
        Ansatz {
            nets: vec![net],
            form: AffineForm { a, terms: vec![NetTerm { b, cvec }], frozen: vec![] },
        }
    }

    /// `u = phi^2 N`: both `u` and `du/dn` vanish on the zero set of a
    /// first-order normalized `phi`.
    pub fn clamped_plate(phi: &Field, net: Network) -> Self {
        Ansatz {
            nets: vec![net],
            form: AffineForm {
                a: zero(),
                terms: vec![NetTerm { b: phi.clone() * phi.clone(), cvec: vec![] }],
                frozen: vec![],
            },
        }
    }

    /// Inhomogeneous essential conditions on several pieces: transfinite
    /// boundary data plus `phi * N` with the joined ADF.
    pub fn transfinite_dirichlet(g: &Field, phi: &Field, net: Network) -> Self {
        Ansatz::dirichlet(g, phi, net)
    }

    pub fn n_params(&self) -> usize {
        self.nets.iter().map(|n| n.n_params()).sum()
    }

    /// Concatenated parameter vector of all networks.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for n in &self.nets {
            out.extend_from_slice(n.params());
        }
        out
    }

    /// Write a concatenated parameter vector back into the networks.
    pub fn set_flat_params(&mut self, theta: &[f64]) {
        let mut off = 0;
        for n in self.nets.iter_mut() {
            let len = n.n_params();
            n.params_mut().copy_from_slice(&theta[off..off + len]);
            off += len;
        }
    }

    /// Evaluate with explicit per-network parameter slices.
    pub fn eval_with_params<S: Nest>(&self, x: &[S], params: &[&[S]]) -> S {
        let mut u = self.form.a.eval(x);
        for (k, term) in self.form.terms.iter().enumerate() {
            let nv = self.nets[k].forward_with_params(x, params[k]);
            u += term.b.eval(x) * nv;
            for (j, cj) in term.cvec.iter().enumerate() {
                let dn = net_dir_deriv(&self.nets[k], x, j, params[k]);
                u += cj.eval(x) * dn;
            }
        }
        for fr in &self.form.frozen {
            let p = params[fr.net_index];
            let xb: Vec<S> = fr.point.iter().map(|&v| S::from_f64(v)).collect();
            let mut trace =
                self.nets[fr.net_index].forward_with_params(&xb, p).scale(fr.alpha);
            for (j, bj) in fr.beta.iter().enumerate() {
                if *bj != 0.0 {
                    trace += net_dir_deriv(&self.nets[fr.net_index], &xb, j, p).scale(*bj);
                }
            }
            u += fr.gamma.eval(x) * trace;
        }
        u
    }
}

/// `dN/dx_j` at `x`, one nesting level up in the scalar tower.
fn net_dir_deriv<S: Nest>(net: &Network, x: &[S], j: usize, params: &[S]) -> S {
    let lifted_x: Vec<S::Up> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| v.lift_dir(if k == j { 1.0 } else { 0.0 }))
        .collect();
    let lifted_p: Vec<S::Up> = params.iter().map(|&p| p.lift_dir(0.0)).collect();
    S::down1(net.forward_with_params(&lifted_x, &lifted_p))
}

impl FieldEval for Ansatz {
    fn eval_s<S: Nest>(&self, x: &[S]) -> S {
        let lifted: Vec<Vec<S>> = self
            .nets
            .iter()
            .map(|n| n.params().iter().map(|&p| S::from_f64(p)).collect())
            .collect();
        let refs: Vec<&[S]> = lifted.iter().map(|v| v.as_slice()).collect();
        self.eval_with_params(x, &refs)
    }
}
