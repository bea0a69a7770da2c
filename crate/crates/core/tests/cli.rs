//! End-to-end runs of the `cbh` binary on files in a temporary directory.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use zonal_bm::bodies::{AnyBody, BodyFile};
use zonal_bm::inequalities::SuiteReport;
use zonal_bm::measures::surface_area_measure;
use zonal_bm::{build_grid, AtomicMeasure, Polytope};

fn cbh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbh")).args(args).env_remove("CBH_THREADS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_polytope(dir: &Path, name: &str, p: &Polytope) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, BodyFile::from_polytope(p).to_json().unwrap()).unwrap();
    path
}

fn load(path: &Path) -> AnyBody {
    BodyFile::from_json(&std::fs::read_to_string(path).unwrap()).unwrap().load(None).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn projection_body_of_the_cube_file() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_polytope(dir.path(), "cube.json", &Polytope::cube(1.0).unwrap());
    let out = dir.path().join("pi.json");
    let run = cbh(&["op", "pi", "--in", s(&cube), "--out", s(&out), "--grid", "12", "--verify"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.lines().count() >= 4 && stdout.lines().all(|l| l.starts_with("ok")), "{stdout}");

    let AnyBody::Support(h) = load(&out) else { panic!("expected a support body") };
    let target = Polytope::cube(4.0).unwrap();
    for (u, v) in h.grid().nodes3().zip(h.samples()) {
        assert!((v - target.support(u)).abs() < 1e-9);
    }
}

#[test]
fn polar_and_intersection_of_a_polytope() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_polytope(dir.path(), "cube.json", &Polytope::cube(1.0).unwrap());
    let polar = dir.path().join("polar.json");
    let run = cbh(&["op", "polar", "--in", s(&cube), "--out", s(&polar), "--grid", "12", "--verify"]);
    assert_eq!(code(&run), 0);
    let AnyBody::Star(star) = load(&polar) else { panic!("expected a star body") };
    // the polar of the cube is the cross-polytope: ρ(e₁) = 1
    let (i, _) = star.grid().nodes3().enumerate().max_by(|a, b| a.1[0].total_cmp(&b.1[0])).unwrap();
    let u = star.grid().nodes3().nth(i).unwrap();
    assert!((star.samples()[i] * Polytope::cube(1.0).unwrap().support(u) - 1.0).abs() < 1e-12);

    let ib = dir.path().join("ib.json");
    let run = cbh(&["op", "intersection", "--in", s(&cube), "--out", s(&ib), "--grid", "12", "--verify"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stdout));
    assert!(matches!(load(&ib), AnyBody::Star(_)));
}

#[test]
fn blaschke_sum_of_a_cube_with_itself() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_polytope(dir.path(), "cube.json", &Polytope::cube(1.0).unwrap());
    let out = dir.path().join("sum.json");
    let run = cbh(&["op", "blaschke-sum", "--a", s(&cube), "--b", s(&cube), "--out", s(&out), "--verify"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    // S(C # C) = 2 S(C), so C # C = √2 C
    let AnyBody::Polytope(p) = load(&out) else { panic!("expected a polytope") };
    assert!((p.volume() - 8.0 * 2f64.powf(1.5)).abs() < 1e-8, "{}", p.volume());
}

#[test]
fn solve_minkowski_round_trip_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("cube_measure.json");
    std::fs::write(&measure, surface_area_measure(&Polytope::cube(1.0).unwrap()).to_json().unwrap()).unwrap();
    let out = dir.path().join("body.json");
    let run = cbh(&["solve-minkowski", "--measure", s(&measure), "--out", s(&out), "--tol", "1e-6"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let AnyBody::Polytope(p) = load(&out) else { panic!("expected a polytope") };
    assert!((p.volume() - 8.0).abs() < 1e-8);

    // atoms with a nonzero centroid are invalid data
    let bad = dir.path().join("bad.json");
    let lopsided = AtomicMeasure::new(3, vec![([1.0, 0.0, 0.0], 1.0), ([0.0, 1.0, 0.0], 1.0), ([0.0, 0.0, 1.0], 1.0)]).unwrap();
    std::fs::write(&bad, lopsided.to_json().unwrap()).unwrap();
    assert_eq!(code(&cbh(&["solve-minkowski", "--measure", s(&bad), "--out", s(&out)])), 2);

    // an iteration budget too small to converge
    let hard = dir.path().join("hard.json");
    let p = zonal_bm::bodies::random_polytope(3, 14).unwrap();
    std::fs::write(&hard, surface_area_measure(&p).to_json().unwrap()).unwrap();
    let run = cbh(&["solve-minkowski", "--measure", s(&hard), "--out", s(&out), "--tol", "1e-14", "--max-iters", "1"]);
    assert_eq!(code(&run), 3, "{}", String::from_utf8_lossy(&run.stderr));

    assert_eq!(code(&cbh(&["solve-minkowski", "--measure", s(&dir.path().join("missing.json")), "--out", s(&out)])), 2);
}

#[test]
fn suite_report_is_deterministic_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.json"), dir.path().join("b.json"), dir.path().join("c.csv"));
    let args = ["suite", "--dim", "3", "--trials", "3", "--seed", "11", "--grid", "12", "--families", "minkowski_type,dual_corollaries,classical_minkowski"];

    let run = cbh(&[&args[..], &["--out", s(&a), "--csv", s(&c)]].concat());
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let run = Command::new(env!("CARGO_BIN_EXE_cbh"))
        .args([&args[..], &["--out", s(&b)]].concat())
        .env("CBH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&run), 0);

    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let report: SuiteReport = serde_json::from_str(&text).unwrap();
    assert!(report.clean());
    assert_eq!(report.config.seed, 11);
    // two convex operators plus one radial operator plus the classical check
    assert_eq!(report.families.len(), 4);
    let rows = std::fs::read_to_string(&c).unwrap().lines().count() - 1;
    assert_eq!(rows as u64, report.total_checks);
}

#[test]
fn invalid_invocations_exit_with_two() {
    assert_eq!(code(&cbh(&["suite", "--dim", "4", "--trials", "1"])), 2);
    assert_eq!(code(&cbh(&["suite", "--trials", "1", "--ops", "nonsense"])), 2);
    assert_eq!(code(&cbh(&["suite", "--trials", "1", "--families", "nonsense"])), 2);
    assert_eq!(code(&cbh(&["bogus"])), 2);
    let run = Command::new(env!("CARGO_BIN_EXE_cbh"))
        .args(["suite", "--trials", "1", "--families", "classical_minkowski"])
        .env("CBH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&run), 2);
}

#[test]
fn grid_info_reports_weights() {
    let run = cbh(&["grid-info", "--resolution", "12"]);
    assert_eq!(code(&run), 0);
    let stdout = String::from_utf8_lossy(&run.stdout);
    let nodes = build_grid(3, 12).unwrap().len();
    assert!(stdout.contains(&format!("nodes                {nodes}")), "{stdout}");
}
