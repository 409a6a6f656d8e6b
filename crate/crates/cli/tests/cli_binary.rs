//! End-to-end checks of the `adfpinn` binary: exit codes, diagnostics,
//! and the polygon ADF dump.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adfpinn"))
}

#[test]
fn list_prints_registry_and_exits_zero() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rod-ex1"));
    assert!(text.contains("poisson4d-req"));
    assert!(text.lines().count() >= 16);
}

#[test]
fn unknown_problem_fails_with_one_line_diagnostic() {
    let out = bin().args(["solve", "not-a-problem"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("unknown problem"));
}

#[test]
fn invalid_method_combination_fails() {
    let out = bin()
        .args(["solve", "rod-ex5", "--method", "collocation"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("zero measure"), "stderr: {err}");
}

#[test]
fn solve_writes_csv_outputs() {
    let dir = std::env::temp_dir().join("adfpinn-cli-solve");
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "solve",
            "rod-ex1",
            "--epochs",
            "5",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6); // header + 5 epochs
    let field = std::fs::read_to_string(dir.join("field.csv")).unwrap();
    assert_eq!(field.lines().count(), 202); // header + 201 grid rows
}

#[test]
fn adf_subcommand_dumps_polygon_field() {
    let dir = std::env::temp_dir().join("adfpinn-cli-adf");
    std::fs::create_dir_all(&dir).unwrap();
    let poly_path = dir.join("square.poly");
    std::fs::write(&poly_path, "0 0\n2 0\n2 2\n0 2\n").unwrap();
    let csv_path = dir.join("phi.csv");
    let out = bin()
        .args([
            "adf",
            poly_path.to_str().unwrap(),
            "--grid",
            "21",
            "--adf",
            "mvp",
            "--out",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().count(), 1 + 21 * 21);
    assert!(text.starts_with("x,y,phi\n"));
    // center value of the MVP ADF on a side-2 square is 2/(4 sqrt 2)
    let center_row = text
        .lines()
        .find(|l| l.starts_with("1,1,"))
        .expect("center grid point present");
    let phi: f64 = center_row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((phi - 2.0 / (4.0 * 2.0f64.sqrt())).abs() < 1e-12);

    // malformed polygon file fails with a diagnostic
    std::fs::write(&poly_path, "0 0\nbad line\n").unwrap();
    let out = bin().args(["adf", poly_path.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
}
