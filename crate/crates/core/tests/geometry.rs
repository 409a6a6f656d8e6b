//! Geometry oracles: hand-evaluated examples and the ADF invariants
//! (boundary zero, first-order normalization, positivity, associativity,
//! partition of unity).

use adfpinn_core::field::Field;
use adfpinn_core::geometry::*;
use adfpinn_core::GeometryError;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn seg(x1: [f64; 2], x2: [f64; 2]) -> Segment {
    Segment::new(x1, x2).unwrap()
}

fn unit_square() -> Polygon {
    Polygon::simple(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
}

fn biunit_square() -> Polygon {
    Polygon::simple(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap()
}

fn l_shape() -> Polygon {
    Polygon::simple(vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0, 0.5],
        [0.5, 0.5],
        [0.5, 1.0],
        [0.0, 1.0],
    ])
    .unwrap()
}

fn hexagon() -> Polygon {
    let v = (0..6)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 6.0;
            [a.cos(), a.sin()]
        })
        .collect();
    Polygon::simple(v).unwrap()
}

/// Central difference along the inward normal, centered half a step
/// inside so one-sided distance fields are handled correctly.
fn fd_inward_normal(phi: &Field, x: &[f64], nu: &[f64]) -> f64 {
    let h = 1e-5;
    let shift = |s: f64| -> Vec<f64> { x.iter().zip(nu).map(|(&v, &n)| v + s * n).collect() };
    (phi.eval(&shift(2.0 * h)[..]) - phi.eval(&shift(0.0)[..])) / (2.0 * h)
}

#[test]
fn line_signed_distance_examples() {
    let f = line_signed_distance(&seg([0.0, 0.0], [1.0, 0.0]));
    assert_relative_eq!(f.eval(&[0.5, 0.5]), -0.5, epsilon = 1e-15);
    assert_relative_eq!(f.eval(&[0.3, 0.0]), 0.0, epsilon = 1e-15);
    let g = line_signed_distance(&seg([0.0, 0.0], [0.0, 2.0]));
    assert_relative_eq!(g.eval(&[1.0, 1.0]), 1.0, epsilon = 1e-15);
}

#[test]
fn degenerate_segment_is_rejected() {
    assert!(matches!(
        Segment::new([0.3, 0.4], [0.3, 0.4]),
        Err(GeometryError::DegenerateSegment)
    ));
}

#[test]
fn trim_function_examples() {
    let t = trim_function(&seg([0.0, 0.0], [1.0, 0.0]));
    assert_relative_eq!(t.eval(&[0.5, 0.0]), 0.25, epsilon = 1e-15);
    assert_relative_eq!(t.eval(&[0.0, 0.0]), 0.0, epsilon = 1e-15);
    assert_relative_eq!(t.eval(&[2.0, 0.0]), -2.0, epsilon = 1e-15);
}

#[test]
fn segment_adf_examples() {
    let phi = segment_adf(&seg([0.0, 0.0], [1.0, 0.0]));
    // hand evaluation: f = -0.3, t = 0.16, varphi = sqrt(t^2 + f^4)
    let varphi = (0.16f64 * 0.16 + 0.3f64.powi(4)).sqrt();
    let expect = (0.09 + ((varphi - 0.16) / 2.0).powi(2)).sqrt();
    assert_relative_eq!(phi.eval(&[0.5, 0.3]), expect, epsilon = 1e-14);
    assert_relative_eq!(phi.eval(&[0.5, 0.3]), 0.30023, epsilon = 1e-5);
    assert_relative_eq!(phi.eval(&[0.5, 0.0]), 0.0, epsilon = 1e-15);
    // far beyond the end the ADF deviates from the exact distance 1
    assert_relative_eq!(phi.eval(&[2.0, 0.0]), 2.0, epsilon = 1e-13);
}

#[test]
fn circle_adf_examples() {
    let c = Point::xy(0.0, 0.0);
    let phi = circle_adf(&c, 1.0).unwrap();
    assert_relative_eq!(phi.eval(&[0.0, 0.0]), 0.5, epsilon = 1e-15);
    assert_relative_eq!(phi.eval(&[1.0, 0.0]), 0.0, epsilon = 1e-15);
    assert_relative_eq!(phi.eval(&[0.0, 0.5]), 0.375, epsilon = 1e-15);
    assert!(matches!(
        circle_adf(&c, 0.0),
        Err(GeometryError::NonPositiveRadius(_))
    ));
}

#[test]
fn first_order_normalize_examples() {
    // omega = 2x in 1D
    let w = Field::x().scale(2.0);
    let phi = first_order_normalize(&w);
    assert_relative_eq!(phi.eval(&[0.0]), 0.0, epsilon = 1e-15);
    let h = 1e-6;
    let slope = (phi.eval(&[h]) - phi.eval(&[-h])) / (2.0 * h);
    assert_relative_eq!(slope, 1.0, epsilon = 1e-9);

    // ellipse with semi-axes (0.5, 0.25): zero set preserved
    let ell = Field::constant(1.0)
        - Field::x() * Field::x() * Field::constant(1.0 / 0.25)
        - Field::y() * Field::y() * Field::constant(1.0 / 0.0625);
    let phi_e = first_order_normalize(&ell);
    assert_relative_eq!(phi_e.eval(&[0.5, 0.0]), 0.0, epsilon = 1e-14);

    // constant-gradient field x + y at (1,1): 2 / sqrt(4 + 2)
    let lin = Field::x() + Field::y();
    let phi_l = first_order_normalize(&lin);
    assert_relative_eq!(phi_l.eval(&[1.0, 1.0]), 2.0 / 6.0f64.sqrt(), epsilon = 1e-14);
}

#[test]
fn r_alpha_examples_and_errors() {
    let w1 = Field::constant(3.0);
    let w2 = Field::constant(4.0);
    let disj = r_alpha_pair(&w1, &w2, 1.0, RKind::Disjunction).unwrap();
    let conj = r_alpha_pair(&w1, &w2, 1.0, RKind::Conjunction).unwrap();
    assert_relative_eq!(disj.eval(&[0.0, 0.0]), 4.0, epsilon = 1e-12);
    assert_relative_eq!(conj.eval(&[0.0, 0.0]), 3.0, epsilon = 1e-12);
    let ones = r_alpha_pair(
        &Field::constant(1.0),
        &Field::constant(1.0),
        0.0,
        RKind::Conjunction,
    )
    .unwrap();
    assert_relative_eq!(ones.eval(&[0.0, 0.0]), 2.0 - 2f64.sqrt(), epsilon = 1e-12);
    assert!(r_alpha_pair(&w1, &w2, -1.0, RKind::Conjunction).is_err());
    assert!(r_alpha_pair(&w1, &w2, 1.5, RKind::Conjunction).is_err());
}

#[test]
fn r_s_examples_and_errors() {
    let zero = Field::constant(0.0);
    let rs = r_s_pair(&zero, &zero, 2, RKind::Disjunction).unwrap();
    assert_eq!(rs.eval(&[0.0, 0.0]), 0.0);
    let one = Field::constant(1.0);
    let rs2 = r_s_pair(&one, &zero, 1, RKind::Disjunction).unwrap();
    assert_relative_eq!(rs2.eval(&[0.0, 0.0]), 2.0, epsilon = 1e-12);
    let rs3 = r_s_pair(&one, &one, 2, RKind::Conjunction).unwrap();
    assert_relative_eq!(rs3.eval(&[0.0, 0.0]), (2.0 - 2f64.sqrt()) * 2.0, epsilon = 1e-12);
    assert!(r_s_pair(&one, &one, 0, RKind::Conjunction).is_err());
}

#[test]
fn r_equivalence_examples() {
    let f = |v: f64| Field::constant(v);
    let j = r_equivalence_join(&[f(1.0), f(1.0)], 1).unwrap();
    assert_relative_eq!(j.eval(&[0.0]), 0.5, epsilon = 1e-14);
    let z = r_equivalence_join(&[f(0.0), f(0.7)], 2).unwrap();
    assert_eq!(z.eval(&[0.0]), 0.0);
    let h = r_equivalence_join(&[f(2.0), f(3.0), f(6.0)], 1).unwrap();
    assert_relative_eq!(h.eval(&[0.0]), 1.0, epsilon = 1e-14);
    assert!(r_equivalence_join(&[f(1.0)], 0).is_err());
}

#[test]
fn r_conjunction_examples() {
    let f = |v: f64| Field::constant(v);
    let a = r_conjunction_join(&f(0.0), &f(5.0), 2).unwrap();
    assert_eq!(a.eval(&[0.0]), 0.0);
    let b = r_conjunction_join(&f(1.0), &f(1.0), 2).unwrap();
    assert_relative_eq!(b.eval(&[0.0]), 2.0 - 2f64.sqrt(), epsilon = 1e-14);
    let c = r_conjunction_join(&f(3.0), &f(4.0), 2).unwrap();
    assert_relative_eq!(c.eval(&[0.0]), 2.0, epsilon = 1e-14);
    assert!(r_conjunction_join(&f(1.0), &f(1.0), 1).is_err());
}

#[test]
fn polygon_adf_req_examples() {
    let phi = polygon_adf_req(&unit_square(), 1).unwrap();
    assert_relative_eq!(phi.eval(&[0.5, 0.0]), 0.0, epsilon = 1e-12);
    let d = fd_inward_normal(&phi, &[0.5, 0.0], &[0.0, 1.0]);
    assert_relative_eq!(d, 1.0, epsilon = 1e-3);

    // biunit square center: each edge ADF is sqrt(1.25) there, so the
    // m = 1 join is sqrt(1.25)/4 (brute-force oracle value)
    let phi2 = polygon_adf_req(&biunit_square(), 1).unwrap();
    let per_edge = 1.25f64.sqrt();
    assert_relative_eq!(phi2.eval(&[0.0, 0.0]), per_edge / 4.0, epsilon = 1e-12);
    assert_relative_eq!(phi2.eval(&[0.0, 0.0]), 0.2795084971, epsilon = 1e-9);
}

#[test]
fn mvp_weight_examples() {
    let w = mvp_polygon_weight(&biunit_square());
    assert_relative_eq!(w.eval(&[0.0, 0.0]), 4.0 * 2f64.sqrt(), epsilon = 1e-12);
    let w2 = mvp_polygon_weight(&unit_square());
    assert_relative_eq!(w2.eval(&[0.5, 0.5]), 8.0 * 2f64.sqrt(), epsilon = 1e-12);
    // on a vertex the kernel is singular: checked evaluation reports it
    assert!(w2.eval_checked(&[0.0, 0.0]).is_err());
}

#[test]
fn mvp_polygon_adf_examples() {
    let phi = mvp_polygon_adf(&biunit_square());
    assert_relative_eq!(
        phi.eval(&[0.0, 0.0]),
        2.0 / (4.0 * 2f64.sqrt()),
        epsilon = 1e-12
    );
    let phi1 = mvp_polygon_adf(&unit_square());
    assert_eq!(phi1.eval(&[0.5, 0.0]), 0.0); // clamp on the edge
    let d = fd_inward_normal(&phi1, &[0.5, 0.0], &[0.0, 1.0]);
    assert_relative_eq!(d, 1.0, epsilon = 1e-2);
}

#[test]
fn mvp_curve_adf_examples() {
    let circle = ParametricCurve::ellipse(1.0, 1.0);
    let phi = mvp_curve_adf(&circle, 1, 256).unwrap();
    // dense trapezoid oracle for W_1(0): integrand is exactly 2 pi
    let nq = 100_000;
    let mut w_oracle = 0.0;
    for k in 0..nq {
        let t = k as f64 / nq as f64;
        let (c, d) = circle.at(t);
        let perp = [d[1], -d[0]];
        let r2 = c[0] * c[0] + c[1] * c[1];
        w_oracle += (c[0] * perp[0] + c[1] * perp[1]) / r2.powf(1.5) / nq as f64;
    }
    assert_relative_eq!(phi.eval(&[0.0, 0.0]), 2.0 / w_oracle, max_relative = 1e-6);
    assert_relative_eq!(phi.eval(&[0.0, 0.0]), 1.0 / std::f64::consts::PI, max_relative = 1e-9);
    // on the curve: clamped to zero
    assert_eq!(phi.eval(&[1.0, 0.0]), 0.0);

    // ellipse symmetry
    let ell = ParametricCurve::ellipse(0.5, 0.3);
    let pe = mvp_curve_adf(&ell, 1, 256).unwrap();
    for (x, y) in [(0.2, 0.1), (0.3, 0.15), (0.1, 0.2)] {
        let v = pe.eval(&[x, y]);
        assert_relative_eq!(v, pe.eval(&[-x, y]), epsilon = 1e-10);
        assert_relative_eq!(v, pe.eval(&[x, -y]), epsilon = 1e-10);
    }
}

#[test]
fn transfinite_examples() {
    // equal ADFs, mu = 1: arithmetic mean of the data
    let phi = Field::constant(0.3);
    let t = transfinite_interpolant(&[
        (phi.clone(), Field::constant(0.0), 1),
        (phi, Field::constant(1.0), 1),
    ])
    .unwrap();
    assert_relative_eq!(t.eval(&[0.0, 0.0]), 0.5, epsilon = 1e-14);

    // annulus data: (7 - 4r)/3 between r = 1/4 and r = 1
    let r = (Field::x() * Field::x() + Field::y() * Field::y()).sqrt();
    let phi1 = Field::constant(1.0) - r.clone();
    let phi2 = r - Field::constant(0.25);
    let g = transfinite_interpolant(&[
        (phi1, Field::constant(1.0), 1),
        (phi2, Field::constant(2.0), 1),
    ])
    .unwrap();
    for rr in [0.25, 0.4, 0.5, 0.8, 1.0] {
        assert_relative_eq!(g.eval(&[rr, 0.0]), (7.0 - 4.0 * rr) / 3.0, epsilon = 1e-12);
    }
    assert_relative_eq!(g.eval(&[1.0, 0.0]), 1.0, epsilon = 1e-13);
    assert_relative_eq!(g.eval(&[0.25, 0.0]), 2.0, epsilon = 1e-13);
}

#[test]
fn hypercube_adf_examples() {
    let d1 = hypercube_adf(1, 1).unwrap();
    assert_relative_eq!(d1.eval(&[0.0]), 0.5, epsilon = 1e-14);
    let d4 = hypercube_adf(4, 1).unwrap();
    assert_eq!(d4.eval(&[1.0, 0.2, -0.3, 0.4]), 0.0);
    assert_eq!(d4.eval(&[0.2, -1.0, 0.3, 0.0]), 0.0);
    let d2 = hypercube_adf(2, 1).unwrap();
    assert_relative_eq!(d2.eval(&[0.0, 0.0]), 0.25, epsilon = 1e-14);
}

// -------------------------------------------------------------------
// invariants
// -------------------------------------------------------------------

fn boundary_samples(poly: &Polygon, n: usize) -> Vec<[f64; 2]> {
    let edges = poly.edges();
    let mut out = Vec::new();
    let per = n.div_ceil(edges.len());
    for e in &edges {
        // strictly interior edge parameters so every sample is regular
        for k in 0..per {
            let t = (k as f64 + 0.5) / per as f64;
            let (a, b) = (e.start(), e.end());
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out.truncate(n);
    out
}

#[test]
fn boundary_zero_invariant() {
    for poly in [unit_square(), l_shape(), hexagon()] {
        let req = polygon_adf_req(&poly, 1).unwrap();
        let mvp = mvp_polygon_adf(&poly);
        for p in boundary_samples(&poly, 200) {
            assert!(req.eval(&p[..]).abs() <= 1e-10, "req not zero at {p:?}");
            assert_eq!(mvp.eval(&p[..]), 0.0, "mvp clamp failed at {p:?}");
        }
    }
}

#[test]
fn first_order_normalization_invariant() {
    for poly in [unit_square(), l_shape(), hexagon()] {
        let diam = poly.diameter();
        let req = polygon_adf_req(&poly, 1).unwrap();
        let mvp = mvp_polygon_adf(&poly);
        let mut checked = 0;
        for e in poly.edges() {
            let (a, b) = (e.start(), e.end());
            // inward normal: rotate the edge direction counterclockwise
            let len = e.length();
            let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let nu = [-dir[1], dir[0]];
            for t in [0.35, 0.5, 0.65] {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let from_vertex = (t * len).min((1.0 - t) * len);
                if from_vertex < 0.05 * diam {
                    continue;
                }
                let dr = fd_inward_normal(&req, &x, &nu);
                assert!((dr - 1.0).abs() <= 1e-3, "REQ slope {dr} at {x:?}");
                let dm = fd_inward_normal(&mvp, &x, &nu);
                assert!((dm - 1.0).abs() <= 1e-2, "MVP slope {dm} at {x:?}");
                checked += 1;
            }
        }
        assert!(checked >= 12);
    }
}

#[test]
fn interior_positivity_invariant() {
    use adfpinn_core::sample::{sample_interior, Domain, Strategy};
    for poly in [unit_square(), l_shape(), hexagon()] {
        let req = polygon_adf_req(&poly, 1).unwrap();
        let mvp = mvp_polygon_adf(&poly);
        let dom = Domain::Poly(poly);
        let pts = sample_interior(&dom, 1000, Strategy::Halton, 0.0, 11, None).unwrap();
        for p in &pts {
            assert!(req.eval(&p[..]) > 0.0);
            assert!(mvp.eval(&p[..]) > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn req_join_is_associative(
        a in 0.01f64..10.0,
        b in 0.01f64..10.0,
        c in 0.01f64..10.0,
        m in 1i32..4,
    ) {
        let fa = Field::constant(a);
        let fb = Field::constant(b);
        let fc = Field::constant(c);
        let ab = r_equivalence_join(&[fa.clone(), fb.clone()], m).unwrap();
        let ab_c = r_equivalence_join(&[ab, fc.clone()], m).unwrap();
        let abc = r_equivalence_join(&[fa, fb, fc], m).unwrap();
        let x = [0.0];
        prop_assert!((ab_c.eval(&x[..]) - abc.eval(&x[..])).abs() <= 1e-12);
    }

    #[test]
    fn r_alpha_at_one_is_max_min(w1 in -10.0f64..10.0, w2 in -10.0f64..10.0) {
        let f1 = Field::constant(w1);
        let f2 = Field::constant(w2);
        let dis = r_alpha_pair(&f1, &f2, 1.0, RKind::Disjunction).unwrap();
        let con = r_alpha_pair(&f1, &f2, 1.0, RKind::Conjunction).unwrap();
        let x = [0.0];
        prop_assert!((dis.eval(&x[..]) - w1.max(w2)).abs() <= 1e-12);
        prop_assert!((con.eval(&x[..]) - w1.min(w2)).abs() <= 1e-12);
    }

    #[test]
    fn transfinite_partition_of_unity(
        p1 in 0.05f64..5.0,
        p2 in 0.05f64..5.0,
        p3 in 0.05f64..5.0,
        mu in 1i32..3,
    ) {
        // all-ones data reproduces one exactly iff the weights sum to 1
        let t = transfinite_interpolant(&[
            (Field::constant(p1), Field::constant(1.0), mu),
            (Field::constant(p2), Field::constant(1.0), mu),
            (Field::constant(p3), Field::constant(1.0), 2),
        ]).unwrap();
        prop_assert!((t.eval(&[0.0][..]) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn polygon_file_roundtrip_and_validation() {
    let text = "0 0\n4 0\n4 4\n0 4\n\n1 1\n1 3\n3 3\n3 1\n";
    let poly = Polygon::parse(text).unwrap();
    assert_eq!(poly.loops().len(), 2);
    // nested polygon: MVP handles both loops; boundary includes the hole
    let phi = mvp_polygon_adf(&poly);
    assert!(phi.eval(&[0.5, 0.5][..]) > 0.0);
    assert_eq!(phi.eval(&[1.0, 2.0][..]), 0.0);

    // inner loop with wrong (counterclockwise) orientation is rejected
    let bad = "0 0\n4 0\n4 4\n0 4\n\n1 1\n3 1\n3 3\n1 3\n";
    assert!(matches!(
        Polygon::parse(bad),
        Err(GeometryError::BadOrientation { loop_index: 1 })
    ));

    let garbage = "0 0\nnope 1\n";
    assert!(matches!(
        Polygon::parse(garbage),
        Err(GeometryError::PolygonParse { line: 2, .. })
    ));
}
