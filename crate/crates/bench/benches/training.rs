//! One full loss/gradient evaluation of representative compiled problems.

use adfpinn_core::field::Field;
use adfpinn_core::geometry::{circle_adf, hypercube_adf, Point};
use adfpinn_core::net::{Activation, Mlp, Network};
use adfpinn_core::sample::{sample_interior, Domain, PointSet, Strategy};
use adfpinn_core::solver::{loss_and_grad, LossSpec, ResidualOp};
use adfpinn_core::structures::Ansatz;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn net(d: usize, widths: &[usize], act: Activation, seed: u64) -> Network {
    let mut w = vec![d];
    w.extend_from_slice(widths);
    w.push(1);
    Network::Mlp(Mlp::init(&w, act, seed).unwrap())
}

fn bench_epochs(c: &mut Criterion) {
    // 1D rod collocation, 100 points
    let g = (Field::constant(1.0) - Field::x().scale(2.0)).scale(0.5);
    let phi1 = Field::x() * (Field::constant(1.0) - Field::x());
    let rod = Ansatz::dirichlet(&g, &phi1, net(1, &[30, 30], Activation::Tanh, 1));
    let rod_pts = PointSet {
        interior: sample_interior(
            &Domain::Interval { a: 0.0, b: 1.0 },
            100,
            Strategy::Grid,
            0.01,
            0,
            None,
        )
        .unwrap(),
        boundary: vec![],
    };
    let b = Field::constant(1.0) - Field::x().scale(2.0) + Field::x().powi(2).scale(10.0);
    let coll = LossSpec::Collocation { op: ResidualOp::NegLaplacian };
    c.bench_function("epoch_rod_100pts", |bch| {
        bch.iter(|| black_box(loss_and_grad(&rod, &coll, &rod_pts, &b, 1.0).unwrap()))
    });

    // 2D heat collocation, 1000 points
    let phi2 = hypercube_adf(2, 1).unwrap();
    let heat = Ansatz::dirichlet(&Field::constant(0.0), &phi2, net(2, &[50, 50], Activation::Tanh, 2));
    let heat_pts = PointSet {
        interior: sample_interior(
            &Domain::Rect { lo: [-1.0, -1.0], hi: [1.0, 1.0] },
            1000,
            Strategy::UniformRandom,
            0.02,
            3,
            None,
        )
        .unwrap(),
        boundary: vec![],
    };
    let f2 = (Field::x().scale(std::f64::consts::PI)).sin()
        * (Field::y().scale(std::f64::consts::PI)).sin();
    c.bench_function("epoch_heat_1000pts", |bch| {
        bch.iter(|| black_box(loss_and_grad(&heat, &coll, &heat_pts, &f2, 4.0).unwrap()))
    });

    // plate biharmonic collocation, 500 points (order-4 jets)
    let phic = circle_adf(&Point::xy(0.0, 0.0), 1.0).unwrap();
    let plate = Ansatz::clamped_plate(&phic, net(2, &[50, 50], Activation::RePU3, 4));
    let plate_pts = PointSet {
        interior: sample_interior(
            &Domain::Disk { center: [0.0, 0.0], r: 1.0 },
            500,
            Strategy::Halton,
            0.0,
            5,
            None,
        )
        .unwrap(),
        boundary: vec![],
    };
    let bih = LossSpec::Collocation { op: ResidualOp::Biharmonic };
    c.bench_function("epoch_plate_500pts_order4", |bch| {
        bch.iter(|| {
            black_box(
                loss_and_grad(&plate, &bih, &plate_pts, &Field::constant(1.0), std::f64::consts::PI)
                    .unwrap(),
            )
        })
    });
}

criterion_group!(benches, bench_epochs);
criterion_main!(benches);
