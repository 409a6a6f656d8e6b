// probe: fast-vs-slow loss and gradient norm on the annulus-mixed setup
use adfpinn_cli::run::{run, Options};
use adfpinn_core::field::Field;
use adfpinn_core::sample::{sample_interior, Domain, PointSet, Strategy};
use adfpinn_core::solver::{self, LossSpec, ResidualOp};

fn main() {
    let mut o = Options::default();
    o.epochs = Some(1200);
    let r = run("annulus-mixed", &o).unwrap();
    let dom = Domain::Annulus { r_inner: 0.25, r_outer: 1.0 };
    let seed = 0u64.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let pts = PointSet {
        interior: sample_interior(&dom, 600, Strategy::Halton, 0.0, seed, None).unwrap(),
        boundary: vec![],
    };
    let f = Field::constant(0.0);
    let slow = solver::collocation_loss(&r.ansatz, ResidualOp::NegLaplacian, &f, &pts.interior).unwrap();
    let spec = LossSpec::Collocation { op: ResidualOp::NegLaplacian };
    let (fast, grad) = solver::loss_and_grad(&r.ansatz, &spec, &pts, &f, dom.measure()).unwrap();
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    println!("slow loss {slow:.6e}  fast loss {fast:.6e}  grad norm {gnorm:.3e}");
    // how large is the geometry-only part of the residual?
    let mut zeroed = r.ansatz.clone();
    for n in zeroed.nets.iter_mut() {
        for p in n.params_mut() { *p = 0.0; }
    }
    let base = solver::collocation_loss(&zeroed, ResidualOp::NegLaplacian, &f, &pts.interior).unwrap();
    println!("loss with zero network: {base:.6e}");
}
