//! Derivative-order invariants: jets vs central finite differences on
//! random tanh networks, and parameter gradients of derivative-bearing
//! losses vs finite differences in the parameters.

use adfpinn_core::autodiff::{biharmonic, fd, grad_input, laplacian, param_gradient};
use adfpinn_core::field::FieldEval;
use adfpinn_core::jet::{Jet, Jet3};
use adfpinn_core::net::{Activation, Mlp};
use adfpinn_core::scalar::Scalar;
use adfpinn_core::tape::Var;
use adfpinn_core::field::Nest;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct NetField(Mlp);

impl FieldEval for NetField {
    fn eval_s<S: Nest>(&self, x: &[S]) -> S {
        self.0.forward(x)
    }
}

#[test]
fn derivative_orders_match_finite_differences_on_tanh_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..20 {
        let arch: &[usize] = if trial % 2 == 0 { &[2, 8, 8, 1] } else { &[2, 12, 1] };
        let net = NetField(Mlp::init(arch, Activation::Tanh, trial).unwrap());
        let x = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let f = |p: &[f64]| net.0.forward(p);

        let g = grad_input(&net, &x).unwrap();
        for j in 0..2 {
            let mut dir = [0.0; 2];
            dir[j] = 1.0;
            let fdv = fd::d1(&f, &x, &dir, 1e-4);
            assert!(
                (g[j] - fdv).abs() <= 1e-6 * fdv.abs().max(1e-3),
                "grad[{j}] {g:?} vs fd {fdv}"
            );
        }

        // tolerances are relative at unit function scale: the network
        // output is O(1) and the FD roundoff floor is eps/h^2 ~ 1e-8
        let lap = laplacian(&net, &x).unwrap();
        let lap_fd = fd::laplacian(&f, &x, 1e-4);
        assert!(
            (lap - lap_fd).abs() <= 1e-6 * lap_fd.abs().max(1.0),
            "lap {lap} vs {lap_fd}"
        );

        let bih = biharmonic(&net, &x).unwrap();
        let fd_bih = |h: f64| {
            (2.0 / 3.0) * (fd::d4(&f, &x, &[1.0, 0.0], h) + fd::d4(&f, &x, &[0.0, 1.0], h))
                + (fd::d4(&f, &x, &[1.0, 1.0], h) + fd::d4(&f, &x, &[1.0, -1.0], h)) / 6.0
        };
        let bih_fd = (4.0 * fd_bih(5e-3) - fd_bih(1e-2)) / 3.0;
        assert!(
            (bih - bih_fd).abs() <= 1e-4 * bih_fd.abs().max(1.0),
            "bih {bih} vs {bih_fd}"
        );
    }
}

#[test]
fn param_gradient_of_laplacian_loss_matches_fd() {
    let mlp = Mlp::init(&[2, 6, 6, 1], Activation::Tanh, 5).unwrap();
    let pts: Vec<[f64; 2]> = vec![[0.2, -0.3], [-0.5, 0.4], [0.1, 0.7]];
    let loss_at = |theta: &[f64]| -> f64 {
        let m = Mlp { widths: mlp.widths.clone(), activation: mlp.activation, params: theta.to_vec() };
        let field = NetField(m);
        pts.iter()
            .map(|x| {
                let l = laplacian(&field, x).unwrap();
                l * l
            })
            .sum::<f64>()
            / pts.len() as f64
    };
    let grad = param_gradient(&mlp.params, |vars| {
        let lifted: Vec<Jet3<Var>> = vars.iter().map(|&v| Jet::constant(v)).collect();
        let mut loss = Var::from_f64(0.0);
        for x in &pts {
            let mut lap = Var::from_f64(0.0);
            for j in 0..2 {
                let seeded: Vec<Jet3<Var>> = x
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        Jet::seed(Var::from_f64(v), Var::from_f64(if k == j { 1.0 } else { 0.0 }))
                    })
                    .collect();
                lap += mlp.forward_with_params(&seeded, &lifted).c[2].scale(2.0);
            }
            loss += lap * lap;
        }
        loss.scale(1.0 / pts.len() as f64)
    })
    .unwrap();

    let h = 1e-4;
    let mut checked = 0;
    for i in (0..mlp.params.len()).step_by(6) {
        let mut tp = mlp.params.clone();
        tp[i] += h;
        let mut tm = mlp.params.clone();
        tm[i] -= h;
        let fdv = (loss_at(&tp) - loss_at(&tm)) / (2.0 * h);
        let denom = fdv.abs().max(1e-6);
        assert!(
            (grad[i] - fdv).abs() / denom <= 1e-5,
            "param {i}: {} vs fd {}",
            grad[i],
            fdv
        );
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn one_neuron_linear_net_gradient() {
    // N(x) = w x + b, loss = (N - 1)^2: grad = 2 (N - 1) (x, 1)
    let (w, b, x) = (0.7, -0.2, 1.3);
    let grad = param_gradient(&[w, b], |t| {
        let n = t[0].scale(x) + t[1];
        let miss = n - Var::from_f64(1.0);
        miss * miss
    })
    .unwrap();
    let n = w * x + b;
    assert!((grad[0] - 2.0 * (n - 1.0) * x).abs() < 1e-12);
    assert!((grad[1] - 2.0 * (n - 1.0)).abs() < 1e-12);
}

#[test]
fn jet_consistency_of_forward_gradients() {
    let mlp = Mlp::init(&[2, 10, 10, 1], Activation::Tanh, 8).unwrap();
    let net = NetField(mlp);
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let f = |p: &[f64]| net.0.forward(p);
    for _ in 0..100 {
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let g = grad_input(&net, &x).unwrap();
        for j in 0..2 {
            let mut dir = [0.0; 2];
            dir[j] = 1.0;
            let fdv = fd::d1(&f, &x, &dir, 1e-5);
            assert!((g[j] - fdv).abs() <= 1e-6 * fdv.abs().max(1e-4));
        }
    }
}
