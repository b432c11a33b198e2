use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pframe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pframe"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(out: &Output) -> Value {
    ok(out);
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: TempDir::new().unwrap() };
        let h = 3f64.sqrt() / 2.0;
        let c = 4.0 - 3f64.sqrt();
        f.write("basis.json", r#"{"dim": 2, "atoms": [[1, 0], [0, 1]], "weights": [0.5, 0.5]}"#);
        f.write("antipodal.json", r#"{"dim": 2, "atoms": [[-1, 0], [0, -1]], "weights": [0.5, 0.5]}"#);
        f.write("line.json", r#"{"dim": 2, "atoms": [[1, 0], [3, 0]], "weights": [0.5, 0.5]}"#);
        f.write(
            "mb.json",
            &format!(r#"{{"dim": 2, "atoms": [[0, 1], [{}, -0.5], [{h}, -0.5]], "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]}}"#, -h),
        );
        f.write("two.json", r#"{"dim": 2, "atoms": [[1, 2], [-3, 0.5]], "weights": [0.5, 0.5]}"#);
        f.write(
            "unequal_mu.json",
            &format!(r#"{{"dim": 2, "atoms": [[1, 0], [{h}, 0.5], [0, 1]], "weights": [0.5, 0.16666666666666666, 0.33333333333333337]}}"#),
        );
        f.write(
            "unequal_nu.json",
            &format!(
                r#"{{"dim": 2, "atoms": [[{}, {}], [{}, {}]], "weights": [0.5, 0.5]}}"#,
                18.0 / c,
                -6.0 * (2.0 + 3f64.sqrt()) / c,
                -12.0 / c,
                24.0 / c
            ),
        );
        f.write("i.json", r#"{"mean": [0, 0], "cov": [[1, 0], [0, 1]]}"#);
        f.write("d41.json", r#"{"mean": [0, 0], "cov": [[4, 0], [0, 1]]}"#);
        f.write("sites.json", r#"{"sites": [[1, 0], [-1, 0]], "targets": [0.75, 0.25]}"#);
        f.write("bad.json", "{\"dim\": 2, ");
        f
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.dir.path().join(name), text).unwrap();
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        pframe(args, self.dir.path())
    }
}

#[test]
fn frame_report_of_basis() {
    let f = Fixture::new();
    let v = json(&f.run(&["frame-report", "basis.json"]));
    assert_eq!(v["lower"], 0.5);
    assert_eq!(v["upper"], 0.5);
    assert_eq!(v["is_frame"], true);
    assert_eq!(v["config"]["command"], "frame-report");
    assert_eq!(v["config"]["seed"], 0);
}

#[test]
fn frame_report_of_singular_measure_and_gaussian() {
    let f = Fixture::new();
    assert_eq!(json(&f.run(&["frame-report", "line.json"]))["is_frame"], false);
    assert_eq!(json(&f.run(&["frame-report", "d41.json"]))["upper"], 4.0);
}

#[test]
fn input_errors_exit_2() {
    let f = Fixture::new();
    assert_eq!(f.run(&["frame-report", "bad.json"]).status.code(), Some(2));
    assert_eq!(f.run(&["frame-report", "missing.json"]).status.code(), Some(2));
    assert_eq!(f.run(&["canonical-dual", "line.json"]).status.code(), Some(2));
    assert_eq!(f.run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let f = Fixture::new();
    f.write("far.json", r#"{"sites": [[0], [1]], "targets": [0.55, 0.45]}"#);
    let out = f.run(&["semidiscrete-adapt", "far.json", "--samples", "10", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("best_weights"));
}

#[test]
fn transport_dual_statuses() {
    let f = Fixture::new();
    let v = json(&f.run(&["transport-dual", "unequal_mu.json", "unequal_nu.json"]));
    assert_eq!(v["status"], "dual");
    let v = json(&f.run(&["transport-dual", "mb.json", "two.json"]));
    assert_eq!(v["status"], "not-dual");
    assert!(v["objective"].as_f64().unwrap() < 0.0);
    assert!(v["min_pair_slack"].as_f64().unwrap() >= -1e-8);
    ok(&f.run(&["canonical-dual", "basis.json", "--out", "basis_dual.json"]));
    let v = json(&f.run(&["transport-dual", "basis.json", "basis_dual.json"]));
    assert_eq!(v["status"], "dual");
}

#[test]
fn canonical_dual_round_trips() {
    let f = Fixture::new();
    ok(&f.run(&["canonical-dual", "mb.json", "--out", "mb_dual.json"]));
    let dual: Value = serde_json::from_str(&std::fs::read_to_string(f.path("mb_dual.json")).unwrap()).unwrap();
    assert!((dual["atoms"][0][1].as_f64().unwrap() - 2.0).abs() < 1e-12);
    // the written file, config echo included, is a valid input again
    let v = json(&f.run(&["frame-report", "mb_dual.json"]));
    assert!((v["lower"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    json(&f.run(&["canonical-dual", "mb_dual.json"]));
}

#[test]
fn geodesic_profiles() {
    let f = Fixture::new();
    ok(&f.run(&["canonical-dual", "mb.json", "--out", "mb_dual.json"]));
    let out = f.run(&["geodesic-profile", "mb.json", "mb_dual.json"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,lambda_min,lambda_max,m2"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r[1] > 0.0));

    let summary = json(&f.run(&["geodesic-profile", "basis.json", "antipodal.json", "--out", "anti.csv"]));
    assert_eq!(summary["all_frames"], false);
    let csv = std::fs::read_to_string(f.path("anti.csv")).unwrap();
    let mid: Vec<f64> = csv.lines().nth(51).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.5);
    assert!(mid[1].abs() < 1e-12);

    let out = f.run(&["geodesic-profile", "basis.json", "antipodal.json", "--grid", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn gaussian_commands() {
    let f = Fixture::new();
    let v = json(&f.run(&["gaussian-w2", "i.json", "d41.json"]));
    assert!((v["w2_squared"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let v = json(&f.run(&["gaussian-path", "i.json", "d41.json", "--grid", "3"]));
    assert_eq!(v["all_frames"], true);
    assert!((v["map"][0][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(v["ts"].as_array().unwrap().len(), 3);
}

#[test]
fn monotone_and_wasserstein() {
    let f = Fixture::new();
    f.write("pairs.json", r#"{"pairs": [[[1, 0], [2, 0]], [[0, 1], [0, 2]]]}"#);
    assert_eq!(json(&f.run(&["monotone", "pairs.json"]))["monotone"], true);
    f.write("swapped.json", r#"{"pairs": [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]}"#);
    let v = json(&f.run(&["monotone", "swapped.json"]));
    assert_eq!(v["monotone"], false);
    assert_eq!(v["witness"], serde_json::json!([1, 0]));
    let v = json(&f.run(&["wasserstein", "mb.json", "mb.json"]));
    assert_eq!(v["w2_squared"], 0.0);
}

#[test]
fn semidiscrete_pipeline_is_reproducible() {
    let f = Fixture::new();
    let args = ["semidiscrete-adapt", "sites.json", "--samples", "50000", "--seed", "4"];
    let first = f.run(&args);
    let second = f.run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert!(v["max_error"].as_f64().unwrap() <= 1e-3);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["samples"], 50000);

    std::fs::write(f.path("coupling.json"), &first.stdout).unwrap();
    let r = json(&f.run(&["reconstruct", "coupling.json", "basis.json", "--samples", "50000", "--seed", "5"]));
    assert!(r["max_error"].as_f64().unwrap() < 5e-2);
    let again = f.run(&["reconstruct", "coupling.json", "basis.json", "--samples", "50000", "--seed", "5"]);
    assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&json(&again)).unwrap());
}
