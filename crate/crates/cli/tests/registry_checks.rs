//! Registry self-consistency: every closed-form solution satisfies its
//! PDE at random interior points, and the CLI surface behaves per its
//! contract (rejections, determinism, CSV shapes).

use adfpinn_cli::registry::{find, registry, Method};
use adfpinn_cli::run::{run, Options};
use adfpinn_cli::export;
use adfpinn_core::sample::{sample_interior, Strategy};

#[test]
fn registry_has_enough_problems_and_unique_names() {
    let reg = registry();
    assert!(reg.len() >= 16, "registry has {} problems", reg.len());
    let mut names: Vec<_> = reg.iter().map(|p| p.name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), reg.len());
    for p in &reg {
        assert!(!p.methods.is_empty());
        assert!(p.methods.contains(&p.default_method));
    }
}

#[test]
fn exact_solutions_satisfy_their_pdes() {
    for spec in registry() {
        let Some(exact) = &spec.exact else { continue };
        let scale = {
            let (lo, hi) = spec.domain.bbox();
            hi.iter().zip(&lo).map(|(h, l)| h - l).fold(0.0f64, f64::max)
        };
        let mut pts = sample_interior(
            &spec.domain,
            120,
            Strategy::Halton,
            0.01 * scale,
            7,
            None,
        )
        .unwrap();
        pts.retain(|x| {
            spec.excluded_points.iter().all(|(p, _)| {
                let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() > 0.01
            })
        });
        pts.truncate(100);
        assert!(pts.len() >= 80);
        for x in &pts {
            let r = spec
                .residual_op
                .residual(exact, x, spec.forcing.eval(&x[..]))
                .unwrap_or_else(|e| panic!("{}: residual failed at {x:?}: {e}", spec.name));
            assert!(
                r.abs() <= 1e-8,
                "{}: residual {r:.3e} at {x:?}",
                spec.name
            );
        }
    }
}

#[test]
fn unknown_problem_is_rejected() {
    let err = run("no-such-problem", &Options::default()).unwrap_err();
    assert!(err.to_string().contains("unknown problem"));
}

#[test]
fn point_load_rejects_collocation_with_explanation() {
    let opts = Options { method: Some(Method::Collocation), ..Options::default() };
    let err = run("rod-ex5", &opts).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("zero measure"), "message was: {msg}");
}

#[test]
fn relu_collocation_is_rejected() {
    let opts = Options {
        activation: Some(adfpinn_core::net::Activation::ReLU),
        epochs: Some(1),
        ..Options::default()
    };
    let err = run("rod-ex1", &opts).unwrap_err();
    assert!(err.to_string().contains("ReLU"));
}

#[test]
fn epochs_override_controls_trace_length() {
    let opts = Options { epochs: Some(1), ..Options::default() };
    let res = run("rod-ex1", &opts).unwrap();
    assert_eq!(res.trace.rows.len(), 1);
}

#[test]
fn export_is_deterministic_and_well_shaped() {
    let opts = Options { epochs: Some(3), ..Options::default() };
    let res1 = run("rod-ex1", &opts).unwrap();
    let res2 = run("rod-ex1", &opts).unwrap();
    let dir1 = std::env::temp_dir().join("adfpinn-export-1");
    let dir2 = std::env::temp_dir().join("adfpinn-export-2");
    export::export(&res1, &dir1).unwrap();
    export::export(&res2, &dir2).unwrap();
    let t1 = std::fs::read(dir1.join("trace.csv")).unwrap();
    let t2 = std::fs::read(dir2.join("trace.csv")).unwrap();
    assert_eq!(t1, t2);
    let f1 = std::fs::read(dir1.join("field.csv")).unwrap();
    let f2 = std::fs::read(dir2.join("field.csv")).unwrap();
    assert_eq!(f1, f2);

    // trace of 3 epochs: header + 3 rows
    let text = String::from_utf8(t1).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("epoch,train_loss,normalized_l2_error\n"));
    // 1D field on the 201-point grid: header + 201 rows
    let ftext = String::from_utf8(f1).unwrap();
    assert_eq!(ftext.lines().count(), 202);
    assert!(ftext.starts_with("x,u_pred,u_exact,abs_err\n"));

    // full round-trip precision: parse back and compare exactly
    let row = ftext.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    let x: f64 = cols[0].parse().unwrap();
    let up: f64 = cols[1].parse().unwrap();
    assert_eq!(x, res1.grid[0][0]);
    assert_eq!(up, res1.u_pred[0]);
}

#[test]
fn lookup_values_from_spec() {
    // rod-ex1 exact u(0.5)
    let spec = find("rod-ex1").unwrap();
    let u = spec.exact.as_ref().unwrap();
    let v = u.eval(&[0.5f64][..]);
    assert!((v - 0.36458333333333).abs() < 1e-10, "u(0.5) = {v}");

    // annulus exact u at r = 0.5 is 1.5
    let ann = find("annulus-dirichlet").unwrap();
    let v = ann.exact.as_ref().unwrap().eval(&[0.5f64, 0.0][..]);
    assert!((v - 1.5).abs() < 1e-12, "u(0.5, 0) = {v}");

    // plate center deflection 1/64
    let plate = find("plate-clamped-disk").unwrap();
    let v = plate.exact.as_ref().unwrap().eval(&[0.0f64, 0.0][..]);
    assert!((v - 1.0 / 64.0).abs() < 1e-14);

    // eikonal square extremes: 1/sqrt(2) at the embedding corners, -1/2 center
    let eik = find("eikonal-square").unwrap();
    let sdf = eik.exact.as_ref().unwrap();
    assert!((sdf.eval(&[1.0f64, 1.0][..]) - 0.5f64 * 2.0f64.sqrt()).abs() < 1e-12);
    assert!((sdf.eval(&[0.0f64, 0.0][..]) + 0.5).abs() < 1e-12);
}
